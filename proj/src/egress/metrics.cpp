#include "edgeflow/egress/metrics.hpp"

namespace edgeflow {

std::string_view to_string(ConnectionStatus s) {
  switch (s) {
    case ConnectionStatus::listening: return "listening";
    case ConnectionStatus::connected: return "connected";
    case ConnectionStatus::disconnected: return "disconnected";
  }
  return "?";
}

std::uint64_t MetricsSnapshot::gaps_filled_total() const {
  std::uint64_t total = 0;
  for (const auto& [policy, n] : gaps_filled) total += n;
  return total;
}

nlohmann::json MetricsSnapshot::to_json() const {
  return {
      {"events_received", events_received},
      {"events_translated", events_translated},
      {"translate_errors", translate_errors},
      {"enqueued", enqueued},
      {"dropped_full", dropped_full},
      {"late_events", late_events},
      {"gaps_filled", gaps_filled},
      {"anomalies_corrected", anomalies_corrected},
      {"frames_emitted", frames_emitted},
      {"frames_degraded", frames_degraded},
      {"decisions_emitted", decisions_emitted},
      {"fallbacks_used", fallbacks_used},
      {"reward_errors", reward_errors},
      {"transitions_written", transitions_written},
      {"store_errors", store_errors},
      {"forward_failures", forward_failures},
      {"connection_losses", connection_losses},
      {"sources", sources},
  };
}

Metrics::Metrics() = default;

void Metrics::gap_filled(GapFill policy) { gaps_[static_cast<int>(policy)].fetch_add(1, std::memory_order_relaxed); }

void Metrics::set_source_status(const std::string& source_id, ConnectionStatus status) {
  std::lock_guard lock(status_mu_);
  status_[source_id] = std::string(to_string(status));
}

MetricsSnapshot Metrics::snapshot() const {
  MetricsSnapshot s;
  s.events_received = events_received.load();
  s.events_translated = events_translated.load();
  s.translate_errors = translate_errors.load();
  s.enqueued = enqueued.load();
  s.dropped_full = dropped_full.load();
  s.late_events = late_events.load();
  for (GapFill g : {GapFill::locf, GapFill::linear, GapFill::historical_mean}) {
    s.gaps_filled[std::string(to_string(g))] = gaps_[static_cast<int>(g)].load();
  }
  s.anomalies_corrected = anomalies_corrected.load();
  s.frames_emitted = frames_emitted.load();
  s.frames_degraded = frames_degraded.load();
  s.decisions_emitted = decisions_emitted.load();
  s.fallbacks_used = fallbacks_used.load();
  s.reward_errors = reward_errors.load();
  s.transitions_written = transitions_written.load();
  s.store_errors = store_errors.load();
  s.forward_failures = forward_failures.load();
  s.connection_losses = connection_losses.load();
  std::lock_guard lock(status_mu_);
  s.sources = status_;
  return s;
}

}  // namespace edgeflow
