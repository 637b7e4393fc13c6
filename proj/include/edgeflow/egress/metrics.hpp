#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "edgeflow/core/types.hpp"

namespace edgeflow {

enum class ConnectionStatus { listening, connected, disconnected };
std::string_view to_string(ConnectionStatus s);

// Point-in-time copy of the engine counters.
struct MetricsSnapshot {
  std::uint64_t events_received = 0;
  std::uint64_t events_translated = 0;
  std::uint64_t translate_errors = 0;
  std::uint64_t enqueued = 0;
  std::uint64_t dropped_full = 0;
  std::uint64_t late_events = 0;
  std::map<std::string, std::uint64_t> gaps_filled;  // keyed by gap-fill policy
  std::uint64_t anomalies_corrected = 0;
  std::uint64_t frames_emitted = 0;
  std::uint64_t frames_degraded = 0;
  std::uint64_t decisions_emitted = 0;
  std::uint64_t fallbacks_used = 0;
  std::uint64_t reward_errors = 0;
  std::uint64_t transitions_written = 0;
  std::uint64_t store_errors = 0;
  std::uint64_t forward_failures = 0;
  std::uint64_t connection_losses = 0;
  std::map<std::string, std::string> sources;

  std::uint64_t gaps_filled_total() const;
  nlohmann::json to_json() const;
  bool operator==(const MetricsSnapshot&) const = default;
};

// Monotonic counters, incrementable from any thread. Source status is the
// only non-counter field and sits behind a mutex.
class Metrics {
 public:
  Metrics();

  std::atomic<std::uint64_t> events_received{0};
  std::atomic<std::uint64_t> events_translated{0};
  std::atomic<std::uint64_t> translate_errors{0};
  std::atomic<std::uint64_t> enqueued{0};
  std::atomic<std::uint64_t> dropped_full{0};
  std::atomic<std::uint64_t> late_events{0};
  std::atomic<std::uint64_t> anomalies_corrected{0};
  std::atomic<std::uint64_t> frames_emitted{0};
  std::atomic<std::uint64_t> frames_degraded{0};
  std::atomic<std::uint64_t> decisions_emitted{0};
  std::atomic<std::uint64_t> fallbacks_used{0};
  std::atomic<std::uint64_t> reward_errors{0};
  std::atomic<std::uint64_t> transitions_written{0};
  std::atomic<std::uint64_t> store_errors{0};
  std::atomic<std::uint64_t> forward_failures{0};
  std::atomic<std::uint64_t> connection_losses{0};

  void gap_filled(GapFill policy);
  void set_source_status(const std::string& source_id, ConnectionStatus status);

  MetricsSnapshot snapshot() const;

 private:
  std::atomic<std::uint64_t> gaps_[4]{};
  mutable std::mutex status_mu_;
  std::map<std::string, std::string> status_;
};

}  // namespace edgeflow
