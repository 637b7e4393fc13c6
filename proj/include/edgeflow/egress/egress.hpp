#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgeflow/core/types.hpp"
#include "edgeflow/egress/metrics.hpp"
#include "edgeflow/inference/inference.hpp"

namespace edgeflow {

// Lowercase hex of the first 8 bytes of SHA-256(salt || 0x00 || environment_id).
std::string anonymize_id(const std::string& environment_id, const std::string& salt);

// Replaces the environment id by its salted hash; nothing else changes.
Transition anonymize(Transition t, const std::string& salt);

// StoredTransition wire form; nlohmann's ordered map gives sorted keys.
nlohmann::json transition_to_json(const Transition& t);

// Append-only JSON Lines transition log. Each append writes one complete line
// under a lock and flushes it.
class TransitionStore {
 public:
  TransitionStore(std::string path, Metrics& metrics);

  // Returns false (and counts store_errors) if the line could not be written.
  bool append(const Transition& t, const StoreSpec& spec);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  Metrics& metrics_;
  std::mutex mu_;
  std::ofstream out_;
  bool opened_ = false;
};

// Newline-delimited JSON appender shared by the frames, decisions and
// late-event logs.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::string& path);
  void write(const nlohmann::json& j);
  void flush();

 private:
  std::mutex mu_;
  std::ofstream out_;
};

class ForwardFailure : public Error {
 public:
  explicit ForwardFailure(const std::string& id, const std::string& detail)
      : Error("ForwardFailure", "forwarder '" + id + "': " + detail) {}
};

// Body sent by http_post and mqtt_publish: {<action_field>: value, "window_start": s}.
nlohmann::json forward_payload(const Decision& d, const ForwarderSpec& spec);

class Forwarder {
 public:
  explicit Forwarder(ForwarderSpec spec) : spec_(std::move(spec)) {}
  virtual ~Forwarder() = default;
  const ForwarderSpec& spec() const { return spec_; }
  // One transport attempt; throws ForwardFailure.
  virtual void deliver_once(const Decision& d) = 0;

 protected:
  ForwarderSpec spec_;
};

std::unique_ptr<Forwarder> make_forwarder(const ForwarderSpec& spec, const std::string& base_dir);

// Routes each decision's action fields to their forwarders. Log forwarders
// write synchronously; network forwarders deliver on their own worker thread
// (one retry after `retry_delay`), so a dead target never stalls the caller.
class ForwardingHub {
 public:
  ForwardingHub(const std::vector<ForwarderSpec>& specs, const std::string& base_dir, Metrics& metrics,
                std::chrono::milliseconds retry_delay = std::chrono::milliseconds(250));
  ~ForwardingHub();

  void forward(const Decision& d);
  // Blocks until every queued delivery has finished.
  void drain();

 private:
  struct Lane {
    std::unique_ptr<Forwarder> forwarder;
    std::deque<Decision> queue;
    std::thread worker;
    bool busy = false;
  };

  void run_lane(Lane& lane);
  void deliver_with_retry(Forwarder& f, const Decision& d);

  Metrics& metrics_;
  std::chrono::milliseconds retry_delay_;
  std::vector<std::unique_ptr<Lane>> lanes_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stopping_ = false;
};

}  // namespace edgeflow
