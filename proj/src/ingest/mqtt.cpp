#include "edgeflow/ingest/mqtt.hpp"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

namespace edgeflow::mqtt {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void put_string(std::vector<std::uint8_t>& out, std::string_view s) {
  if (s.size() > 0xffff) throw ProtocolError("string field longer than 65535 bytes");
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

std::vector<std::uint8_t> frame(std::uint8_t first, const std::vector<std::uint8_t>& body) {
  std::vector<std::uint8_t> out{first};
  const auto len = encode_remaining_length(body.size());
  out.insert(out.end(), len.begin(), len.end());
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

std::uint16_t get_u16(const std::vector<std::uint8_t>& b, std::size_t at) {
  if (at + 2 > b.size()) throw ProtocolError("truncated packet");
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

}  // namespace

std::vector<std::uint8_t> encode_remaining_length(std::size_t n) {
  if (n > 268'435'455) throw ProtocolError("packet too large");
  std::vector<std::uint8_t> out;
  do {
    std::uint8_t byte = n % 128;
    n /= 128;
    if (n > 0) byte |= 0x80;
    out.push_back(byte);
  } while (n > 0);
  return out;
}

std::vector<std::uint8_t> encode_connect(std::string_view client_id, std::uint16_t keep_alive_s) {
  std::vector<std::uint8_t> body;
  put_string(body, "MQTT");
  body.push_back(4);     // protocol level 3.1.1
  body.push_back(0x02);  // clean session
  put_u16(body, keep_alive_s);
  put_string(body, client_id);
  return frame(0x10, body);
}

std::vector<std::uint8_t> encode_subscribe(std::uint16_t packet_id, std::string_view topic_filter, int qos) {
  std::vector<std::uint8_t> body;
  put_u16(body, packet_id);
  put_string(body, topic_filter);
  body.push_back(static_cast<std::uint8_t>(qos));
  return frame(0x82, body);
}

std::vector<std::uint8_t> encode_publish(const Publish& p) {
  std::vector<std::uint8_t> body;
  put_string(body, p.topic);
  if (p.qos > 0) put_u16(body, p.packet_id);
  body.insert(body.end(), p.payload.begin(), p.payload.end());
  return frame(static_cast<std::uint8_t>(0x30 | (p.qos << 1)), body);
}

std::vector<std::uint8_t> encode_puback(std::uint16_t packet_id) {
  std::vector<std::uint8_t> body;
  put_u16(body, packet_id);
  return frame(0x40, body);
}

std::vector<std::uint8_t> encode_simple(PacketType type) {
  return {static_cast<std::uint8_t>(static_cast<std::uint8_t>(type) << 4), 0};
}

std::optional<Packet> take_packet(std::vector<std::uint8_t>& buffer) {
  if (buffer.size() < 2) return std::nullopt;
  std::size_t length = 0;
  std::size_t multiplier = 1;
  std::size_t pos = 1;
  for (;;) {
    if (pos >= buffer.size()) return std::nullopt;
    if (pos > 4) throw ProtocolError("malformed remaining length");
    const std::uint8_t byte = buffer[pos++];
    length += (byte & 0x7f) * multiplier;
    multiplier *= 128;
    if ((byte & 0x80) == 0) break;
  }
  if (buffer.size() < pos + length) return std::nullopt;
  Packet p{static_cast<PacketType>(buffer[0] >> 4), static_cast<std::uint8_t>(buffer[0] & 0x0f),
           std::vector<std::uint8_t>(buffer.begin() + static_cast<std::ptrdiff_t>(pos),
                                     buffer.begin() + static_cast<std::ptrdiff_t>(pos + length))};
  buffer.erase(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(pos + length));
  return p;
}

Publish decode_publish(const Packet& p) {
  if (p.type != PacketType::publish) throw ProtocolError("not a PUBLISH packet");
  Publish out;
  out.qos = (p.flags >> 1) & 0x03;
  if (out.qos > 1) throw ProtocolError("QoS 2 is not supported");
  const std::uint16_t topic_len = get_u16(p.body, 0);
  std::size_t pos = 2;
  if (pos + topic_len > p.body.size()) throw ProtocolError("truncated topic");
  out.topic.assign(p.body.begin() + 2, p.body.begin() + 2 + topic_len);
  pos += topic_len;
  if (out.qos > 0) {
    out.packet_id = get_u16(p.body, pos);
    pos += 2;
  }
  out.payload.assign(p.body.begin() + static_cast<std::ptrdiff_t>(pos), p.body.end());
  return out;
}

bool topic_matches(std::string_view filter, std::string_view topic) {
  std::size_t f = 0;
  std::size_t t = 0;
  for (;;) {
    const std::size_t f_end = std::min(filter.find('/', f), filter.size());
    const std::string_view level = filter.substr(f, f_end - f);
    if (level == "#") return true;
    if (t > topic.size()) return false;
    const std::size_t t_end = std::min(topic.find('/', t), topic.size());
    if (level != "+" && level != topic.substr(t, t_end - t)) return false;
    const bool filter_done = f_end == filter.size();
    const bool topic_done = t_end == topic.size();
    if (filter_done || topic_done) {
      if (filter_done && topic_done) return true;
      // "a/#" also matches "a".
      return topic_done && filter.substr(f_end) == "/#";
    }
    f = f_end + 1;
    t = t_end + 1;
  }
}

Client::~Client() { close_socket(); }

void Client::close_socket() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  inbox_.clear();
}

void Client::connect(const std::string& host, int port, const std::string& client_id, std::chrono::milliseconds timeout) {
  close_socket();
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
    throw ConnectionError("cannot resolve " + host);
  }
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw ConnectionError("cannot connect to " + host + ":" + std::to_string(port) + ": " + std::strerror(errno));
  fd_ = fd;

  write_all(encode_connect(client_id, 60));
  const Packet ack = read_packet(timeout);
  if (ack.type != PacketType::connack || ack.body.size() != 2) {
    close_socket();
    throw ProtocolError("expected CONNACK");
  }
  if (ack.body[1] != 0) {
    close_socket();
    throw ConnectionError("broker refused connection, code " + std::to_string(ack.body[1]));
  }
}

void Client::subscribe(const std::string& topic_filter, int qos) {
  const std::uint16_t id = next_id_++;
  write_all(encode_subscribe(id, topic_filter, qos));
  for (;;) {
    Packet p = read_packet(std::chrono::milliseconds(5000));
    if (p.type == PacketType::publish) {
      pending_.push_back(decode_publish(p));
      continue;
    }
    if (p.type != PacketType::suback || get_u16(p.body, 0) != id) throw ProtocolError("expected SUBACK");
    if (p.body.size() < 3 || p.body[2] == 0x80) throw ConnectionError("subscription to '" + topic_filter + "' refused");
    return;
  }
}

void Client::publish(const std::string& topic, const std::string& payload, int qos, std::chrono::milliseconds timeout) {
  Publish p{topic, payload, qos, 0};
  if (qos > 0) {
    p.packet_id = next_id_++;
    if (next_id_ == 0) next_id_ = 1;
  }
  write_all(encode_publish(p));
  if (qos == 0) return;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw ConnectionError("timed out waiting for PUBACK");
    Packet ack = read_packet(left);
    if (ack.type == PacketType::puback && get_u16(ack.body, 0) == p.packet_id) return;
    if (ack.type == PacketType::publish) pending_.push_back(decode_publish(ack));
  }
}

std::optional<Publish> Client::poll(std::chrono::milliseconds timeout) {
  if (pending_.empty()) {
    Packet p;
    try {
      p = read_packet(timeout);
    } catch (const ConnectionError& e) {
      if (std::string_view(e.what()) == "timeout") return std::nullopt;
      throw;
    }
    if (p.type != PacketType::publish) return std::nullopt;
    pending_.push_back(decode_publish(p));
  }
  Publish msg = std::move(pending_.front());
  pending_.erase(pending_.begin());
  if (msg.qos == 1) write_all(encode_puback(msg.packet_id));
  return msg;
}

void Client::ping() { write_all(encode_simple(PacketType::pingreq)); }

void Client::disconnect() {
  if (fd_ < 0) return;
  try {
    write_all(encode_simple(PacketType::disconnect));
  } catch (const Error&) {
  }
  close_socket();
}

Packet Client::read_packet(std::chrono::milliseconds timeout) {
  if (fd_ < 0) throw ConnectionError("not connected");
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (auto p = take_packet(inbox_)) return std::move(*p);
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw ConnectionError("timeout");
    pollfd pfd{fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc == 0) continue;
    if (rc < 0) {
      if (errno == EINTR) continue;
      close_socket();
      throw ConnectionError("poll failed");
    }
    std::uint8_t buf[4096];
    const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
    if (n <= 0) {
      close_socket();
      throw ConnectionError("connection closed by broker");
    }
    inbox_.insert(inbox_.end(), buf, buf + n);
  }
}

void Client::write_all(std::span<const std::uint8_t> bytes) {
  if (fd_ < 0) throw ConnectionError("not connected");
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      close_socket();
      throw ConnectionError("send failed");
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::chrono::milliseconds Backoff::delay(int attempt) const {
  auto d = base;
  for (int i = 0; i < attempt && d < cap; ++i) d *= 2;
  return std::min(d, cap);
}

Receiver::Receiver(const SourceSpec& source, Router& router, Metrics& metrics, Backoff backoff)
    : source_(source), router_(router), metrics_(metrics), backoff_(backoff) {}

Receiver::~Receiver() { stop(); }

void Receiver::start() {
  metrics_.set_source_status(source_.source_id, ConnectionStatus::disconnected);
  stop_ = false;
  thread_ = std::thread([this] { run(); });
}

void Receiver::stop() {
  stop_ = true;
  if (thread_.joinable()) thread_.join();
}

bool Receiver::sleep_interruptible(std::chrono::milliseconds d) {
  const auto until = std::chrono::steady_clock::now() + d;
  while (!stop_ && std::chrono::steady_clock::now() < until) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  return !stop_;
}

void Receiver::run() {
  int attempt = 0;
  auto last_ping = std::chrono::steady_clock::now();
  while (!stop_) {
    Client client;
    try {
      client.connect(source_.mqtt.host, source_.mqtt.port, source_.mqtt.client_id, std::chrono::milliseconds(5000));
      client.subscribe(source_.mqtt.topic, 1);
    } catch (const Error&) {
      if (!sleep_interruptible(backoff_.delay(attempt++))) break;
      continue;
    }
    attempt = 0;
    metrics_.set_source_status(source_.source_id, ConnectionStatus::connected);
    try {
      while (!stop_) {
        auto msg = client.poll(std::chrono::milliseconds(100));
        if (std::chrono::steady_clock::now() - last_ping > std::chrono::seconds(30)) {
          client.ping();
          last_ping = std::chrono::steady_clock::now();
        }
        if (!msg || !topic_matches(source_.mqtt.topic, msg->topic)) continue;
        const Timestamp arrival = std::chrono::time_point_cast<Duration>(std::chrono::system_clock::now());
        try {
          router_.submit(RawEvent{source_.source_id, arrival, msg->payload, SourceKind::mqtt});
        } catch (const TranslateError&) {
          // counted by the router; message discarded
        }
      }
      client.disconnect();
    } catch (const Error&) {
      metrics_.connection_losses.fetch_add(1, std::memory_order_relaxed);
      metrics_.set_source_status(source_.source_id, ConnectionStatus::disconnected);
      if (!sleep_interruptible(backoff_.delay(attempt++))) break;
    }
  }
  metrics_.set_source_status(source_.source_id, ConnectionStatus::disconnected);
}

}  // namespace edgeflow::mqtt
