#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "edgeflow/core/errors.hpp"
#include "edgeflow/core/types.hpp"
#include "edgeflow/egress/metrics.hpp"
#include "edgeflow/ingest/router.hpp"

// Minimal MQTT 3.1.1 over plain TCP: CONNECT, SUBSCRIBE and PUBLISH at
// QoS 0/1, PINGREQ keep-alive. Enough for telemetry in and setpoints out.
namespace edgeflow::mqtt {

enum class PacketType : std::uint8_t {
  connect = 1,
  connack = 2,
  publish = 3,
  puback = 4,
  subscribe = 8,
  suback = 9,
  pingreq = 12,
  pingresp = 13,
  disconnect = 14,
};

struct Packet {
  PacketType type;
  std::uint8_t flags = 0;
  std::vector<std::uint8_t> body;
};

struct Publish {
  std::string topic;
  std::string payload;
  int qos = 0;
  std::uint16_t packet_id = 0;
};

class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& detail) : Error("MqttProtocolError", detail) {}
};

class ConnectionError : public Error {
 public:
  explicit ConnectionError(const std::string& detail) : Error("MqttConnectionError", detail) {}
};

std::vector<std::uint8_t> encode_remaining_length(std::size_t n);
std::vector<std::uint8_t> encode_connect(std::string_view client_id, std::uint16_t keep_alive_s);
std::vector<std::uint8_t> encode_subscribe(std::uint16_t packet_id, std::string_view topic_filter, int qos);
std::vector<std::uint8_t> encode_publish(const Publish& p);
std::vector<std::uint8_t> encode_puback(std::uint16_t packet_id);
std::vector<std::uint8_t> encode_simple(PacketType type);  // pingreq, pingresp, disconnect

// Splits one packet off the front of `buffer`. Returns nullopt when more bytes
// are needed; throws ProtocolError on malformed framing.
std::optional<Packet> take_packet(std::vector<std::uint8_t>& buffer);

Publish decode_publish(const Packet& p);

// Filter matching with '+' and '#' wildcards.
bool topic_matches(std::string_view filter, std::string_view topic);

// Blocking TCP client. Not thread-safe: one owner thread.
class Client {
 public:
  Client() = default;
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  void connect(const std::string& host, int port, const std::string& client_id, std::chrono::milliseconds timeout);
  void subscribe(const std::string& topic_filter, int qos);
  // QoS 1 waits for the matching PUBACK within `timeout`.
  void publish(const std::string& topic, const std::string& payload, int qos, std::chrono::milliseconds timeout);
  // Waits up to `timeout` for one incoming PUBLISH (QoS 1 is acknowledged).
  std::optional<Publish> poll(std::chrono::milliseconds timeout);
  void ping();
  void disconnect();
  bool connected() const { return fd_ >= 0; }

 private:
  Packet read_packet(std::chrono::milliseconds timeout);
  void write_all(std::span<const std::uint8_t> bytes);
  void close_socket();

  int fd_ = -1;
  std::uint16_t next_id_ = 1;
  std::vector<std::uint8_t> inbox_;
  std::vector<Publish> pending_;
};

struct Backoff {
  std::chrono::milliseconds base{1000};
  std::chrono::milliseconds cap{60000};
  // Delay before reconnect attempt `attempt` (0-based): base * 2^attempt, capped.
  std::chrono::milliseconds delay(int attempt) const;
};

// Receiver for one MQTT source: subscribes at QoS 1 and feeds every message
// on the topic through the router. Reconnects with exponential backoff.
class Receiver {
 public:
  Receiver(const SourceSpec& source, Router& router, Metrics& metrics, Backoff backoff = {});
  ~Receiver();

  void start();
  void stop();

 private:
  void run();
  bool sleep_interruptible(std::chrono::milliseconds d);

  const SourceSpec& source_;
  Router& router_;
  Metrics& metrics_;
  Backoff backoff_;
  std::atomic<bool> stop_{false};
  std::thread thread_;
};

}  // namespace edgeflow::mqtt
