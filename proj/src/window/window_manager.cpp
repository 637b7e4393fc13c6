#include "edgeflow/window/window_manager.hpp"

#include <algorithm>

namespace edgeflow {

nlohmann::json late_event_to_json(const LateEvent& e) {
  return {{"env", e.environment_id},
          {"signal", e.signal_id},
          {"event_time", to_unix_nanos(e.event_time)},
          {"window_start", to_unix_seconds(e.window_start)},
          {"value", e.value}};
}

WindowManager::WindowManager(const EnvironmentConfig& config, Timestamp run_start, Metrics& metrics, LateSink on_late)
    : config_(config),
      metrics_(metrics),
      on_late_(std::move(on_late)),
      window_(config.window_length()),
      grace_(seconds_to_duration(config.grace_seconds)),
      horizon_(Duration{config.day_seconds * kNanosPerSecond} * config.history_days),
      next_start_(assign_window(std::max(run_start, config.epoch_origin), window_, config.epoch_origin).start) {
  for (const SignalSpec& s : config.signals) {
    SignalState st{&s, std::nullopt, {}};
    if (s.anomaly) st.anomaly.emplace(static_cast<std::size_t>(s.anomaly->buffer_len));
    st.history.keep_history = s.gap_fill == GapFill::historical_mean;
    signals_.emplace(s.signal_id, std::move(st));
  }
}

void WindowManager::ingest(const Measurement& m) {
  if (!signals_.count(m.signal_id)) return;
  const WindowBounds w = assign_window(m.event_time, window_, config_.epoch_origin);
  if (w.start < next_start_) {
    metrics_.late_events.fetch_add(1, std::memory_order_relaxed);
    if (on_late_) on_late_({config_.environment_id, m.signal_id, m.event_time, w.start, m.value});
    return;
  }
  open_[w.start][m.signal_id].push_back({m.event_time, m.value, m.quality});
}

std::vector<WindowFrame> WindowManager::advance(Timestamp now) {
  std::vector<WindowFrame> out;
  while (next_start_ + window_ + grace_ < now) out.push_back(close_next());
  return out;
}

std::vector<WindowFrame> WindowManager::close_through(Timestamp limit) {
  std::vector<WindowFrame> out;
  while (next_start_ + window_ <= limit) out.push_back(close_next());
  return out;
}

WindowFrame WindowManager::close_next() {
  const WindowBounds bounds{next_start_, next_start_ + window_};
  std::map<std::string, std::vector<Sample>, std::less<>> bucket;
  if (auto it = open_.find(bounds.start); it != open_.end()) {
    bucket = std::move(it->second);
    open_.erase(it);
  }

  WindowFrame frame;
  frame.environment_id = config_.environment_id;
  frame.window = bounds;
  const GapContext ctx{bounds, config_.epoch_origin, Duration{config_.day_seconds * kNanosPerSecond}};
  std::map<std::string, std::optional<FrameValue>, std::less<>> resolved;
  std::size_t good = 0;

  for (const SignalSpec& spec : config_.signals) {
    SignalState& st = signals_.at(spec.signal_id);
    st.history.prune_before(bounds.start - horizon_);

    std::optional<FrameValue> value;
    auto samples_it = bucket.find(spec.signal_id);
    if (samples_it != bucket.end() && !samples_it->second.empty()) {
      std::vector<Sample>& samples = samples_it->second;
      std::stable_sort(samples.begin(), samples.end(),
                       [](const Sample& a, const Sample& b) { return a.time < b.time; });
      if (st.anomaly) {
        for (Sample& s : samples) {
          const FrameValue accepted = detect_and_correct(s.value, *st.anomaly, *spec.anomaly);
          if (accepted.quality == Quality::corrected) {
            metrics_.anomalies_corrected.fetch_add(1, std::memory_order_relaxed);
          }
          s.value = accepted.value;
          s.quality = worst(s.quality, accepted.quality);
        }
      }
      value = aggregate(samples, spec.aggregation);
      for (const Sample& s : samples) st.history.record(s);
    } else {
      try {
        const GapResult filled = fill_gap(spec, ctx, st.history);
        metrics_.gap_filled(filled.policy_used);
        value = filled.value;
      } catch (const GapUnfillable&) {
        frame.degraded = true;
      }
    }

    if (value && (value->quality == Quality::measured || value->quality == Quality::corrected)) ++good;
    frame.values[spec.signal_id] = value.value_or(FrameValue{0.0, Quality::predicted});
    resolved[spec.signal_id] = value;
  }

  for (const DerivedSignalSpec& d : config_.derived) {
    std::vector<FusionInput> members;
    members.reserve(d.members.size());
    for (const DerivedMember& m : d.members) members.push_back({m.signal_id, resolved.at(m.signal_id), m.weight});
    try {
      frame.values[d.signal_id] = fuse(members);
    } catch (const MemberUnresolved&) {
      frame.degraded = true;
      frame.values[d.signal_id] = {0.0, Quality::predicted};
    }
  }

  frame.completeness =
      config_.signals.empty() ? 0.0 : static_cast<double>(good) / static_cast<double>(config_.signals.size());

  metrics_.frames_emitted.fetch_add(1, std::memory_order_relaxed);
  if (frame.degraded) metrics_.frames_degraded.fetch_add(1, std::memory_order_relaxed);
  next_start_ = bounds.end;
  return frame;
}

}  // namespace edgeflow
