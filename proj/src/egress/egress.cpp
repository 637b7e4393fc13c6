#include "edgeflow/egress/egress.hpp"

#include <openssl/evp.h>

#include <filesystem>

#include <httplib.h>

#include "edgeflow/ingest/mqtt.hpp"

namespace edgeflow {

using nlohmann::json;

std::string anonymize_id(const std::string& environment_id, const std::string& salt) {
  std::string input = salt;
  input.push_back('\0');
  input += environment_id;

  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(input.data(), input.size(), digest, &len, EVP_sha256(), nullptr) != 1 || len < 8) {
    throw Error("CryptoError", "SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(16);
  for (int i = 0; i < 8; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0x0f]);
  }
  return out;
}

Transition anonymize(Transition t, const std::string& salt) {
  t.environment_id = anonymize_id(t.environment_id, salt);
  return t;
}

json transition_to_json(const Transition& t) {
  json obs = json::object();
  json qual = json::object();
  for (const auto& [signal, v] : t.observation) {
    obs[signal] = v.value;
    qual[signal] = to_string(v.quality);
  }
  return {{"env", t.environment_id},
          {"window_start", to_unix_seconds(t.window_start)},
          {"obs", std::move(obs)},
          {"qual", std::move(qual)},
          {"enc", t.encoded},
          {"raw_action", t.raw_action},
          {"action", t.action},
          {"valid", t.valid},
          {"fallback_used", t.fallback_used},
          {"reward", t.reward ? json(*t.reward) : json(nullptr)},
          {"degraded", t.degraded}};
}

TransitionStore::TransitionStore(std::string path, Metrics& metrics) : path_(std::move(path)), metrics_(metrics) {}

bool TransitionStore::append(const Transition& t, const StoreSpec& spec) {
  const std::string line = transition_to_json(spec.anonymize ? anonymize(t, spec.salt) : t).dump() + "\n";
  std::lock_guard lock(mu_);
  if (!opened_) {
    out_.open(path_, std::ios::binary | std::ios::app);
    opened_ = true;
  }
  if (out_) {
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
    out_.flush();
  }
  if (!out_) {
    metrics_.store_errors.fetch_add(1, std::memory_order_relaxed);
    return false;
  }
  metrics_.transitions_written.fetch_add(1, std::memory_order_relaxed);
  return true;
}

JsonlWriter::JsonlWriter(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error("IoError", "cannot open '" + path + "' for writing");
}

void JsonlWriter::write(const json& j) {
  const std::string line = j.dump() + "\n";
  std::lock_guard lock(mu_);
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
}

void JsonlWriter::flush() {
  std::lock_guard lock(mu_);
  out_.flush();
}

json forward_payload(const Decision& d, const ForwarderSpec& spec) {
  return {{spec.action_field, d.action.at(spec.action_field)}, {"window_start", to_unix_seconds(d.window_start)}};
}

namespace {

class LogForwarder final : public Forwarder {
 public:
  LogForwarder(const ForwarderSpec& spec, const std::string& base_dir) : Forwarder(spec) {
    std::filesystem::path p(spec.target);
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    out_.open(p, std::ios::binary | std::ios::app);
  }

  void deliver_once(const Decision& d) override {
    const json line = {{"forwarder", spec_.id},
                       {"env", d.environment_id},
                       {"window_start", to_unix_seconds(d.window_start)},
                       {"field", spec_.action_field},
                       {"value", d.action.at(spec_.action_field)}};
    out_ << line.dump() << '\n';
    out_.flush();
    if (!out_) throw ForwardFailure(spec_.id, "cannot write decisions log");
  }

 private:
  std::ofstream out_;
};

class HttpPostForwarder final : public Forwarder {
 public:
  explicit HttpPostForwarder(const ForwarderSpec& spec) : Forwarder(spec) {
    const auto scheme = spec.target.find("://");
    const auto path_at = spec.target.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    base_ = spec.target.substr(0, path_at);
    path_ = path_at == std::string::npos ? "/" : spec.target.substr(path_at);
  }

  void deliver_once(const Decision& d) override {
    httplib::Client client(base_);
    client.set_connection_timeout(std::chrono::seconds(2));
    client.set_read_timeout(std::chrono::seconds(2));
    auto res = client.Post(path_, forward_payload(d, spec_).dump(), "application/json");
    if (!res) throw ForwardFailure(spec_.id, httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) throw ForwardFailure(spec_.id, "status " + std::to_string(res->status));
  }

 private:
  std::string base_;
  std::string path_;
};

// target: mqtt://host:port/topic
class MqttPublishForwarder final : public Forwarder {
 public:
  explicit MqttPublishForwarder(const ForwarderSpec& spec) : Forwarder(spec) {
    std::string rest = spec.target;
    if (rest.rfind("mqtt://", 0) == 0) rest = rest.substr(7);
    const auto slash = rest.find('/');
    if (slash == std::string::npos) throw ForwardFailure(spec.id, "target must be mqtt://host:port/topic");
    topic_ = rest.substr(slash + 1);
    const std::string hostport = rest.substr(0, slash);
    const auto colon = hostport.rfind(':');
    host_ = hostport.substr(0, colon);
    port_ = colon == std::string::npos ? 1883 : std::stoi(hostport.substr(colon + 1));
  }

  void deliver_once(const Decision& d) override {
    try {
      if (!client_.connected()) client_.connect(host_, port_, "edgeflow-fwd-" + spec_.id, std::chrono::seconds(2));
      client_.publish(topic_, forward_payload(d, spec_).dump(), 1, std::chrono::seconds(2));
    } catch (const Error& e) {
      client_.disconnect();
      throw ForwardFailure(spec_.id, e.what());
    }
  }

 private:
  std::string host_;
  int port_ = 1883;
  std::string topic_;
  mqtt::Client client_;
};

}  // namespace

std::unique_ptr<Forwarder> make_forwarder(const ForwarderSpec& spec, const std::string& base_dir) {
  switch (spec.kind) {
    case ForwarderKind::log: return std::make_unique<LogForwarder>(spec, base_dir);
    case ForwarderKind::http_post: return std::make_unique<HttpPostForwarder>(spec);
    case ForwarderKind::mqtt_publish: return std::make_unique<MqttPublishForwarder>(spec);
  }
  return nullptr;
}

ForwardingHub::ForwardingHub(const std::vector<ForwarderSpec>& specs, const std::string& base_dir, Metrics& metrics,
                             std::chrono::milliseconds retry_delay)
    : metrics_(metrics), retry_delay_(retry_delay) {
  for (const ForwarderSpec& spec : specs) {
    auto lane = std::make_unique<Lane>();
    lane->forwarder = make_forwarder(spec, base_dir);
    if (spec.kind != ForwarderKind::log) {
      Lane* raw = lane.get();
      lane->worker = std::thread([this, raw] { run_lane(*raw); });
    }
    lanes_.push_back(std::move(lane));
  }
}

ForwardingHub::~ForwardingHub() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& lane : lanes_) {
    if (lane->worker.joinable()) lane->worker.join();
  }
}

void ForwardingHub::deliver_with_retry(Forwarder& f, const Decision& d) {
  try {
    f.deliver_once(d);
    return;
  } catch (const ForwardFailure&) {
  }
  std::this_thread::sleep_for(retry_delay_);
  try {
    f.deliver_once(d);
  } catch (const ForwardFailure&) {
    metrics_.forward_failures.fetch_add(1, std::memory_order_relaxed);
  }
}

void ForwardingHub::forward(const Decision& d) {
  for (auto& lane : lanes_) {
    if (!d.action.count(lane->forwarder->spec().action_field)) continue;
    if (lane->forwarder->spec().kind == ForwarderKind::log) {
      deliver_with_retry(*lane->forwarder, d);
      continue;
    }
    {
      std::lock_guard lock(mu_);
      lane->queue.push_back(d);
    }
    cv_.notify_all();
  }
}

void ForwardingHub::run_lane(Lane& lane) {
  std::unique_lock lock(mu_);
  for (;;) {
    cv_.wait(lock, [&] { return stopping_ || !lane.queue.empty(); });
    if (lane.queue.empty()) return;  // stopping and drained
    Decision d = std::move(lane.queue.front());
    lane.queue.pop_front();
    lane.busy = true;
    lock.unlock();
    deliver_with_retry(*lane.forwarder, d);
    lock.lock();
    lane.busy = false;
    cv_.notify_all();
  }
}

void ForwardingHub::drain() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] {
    for (const auto& lane : lanes_) {
      if (!lane->queue.empty() || lane->busy) return false;
    }
    return true;
  });
}

}  // namespace edgeflow
