#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "edgeflow/core/types.hpp"
#include "edgeflow/egress/metrics.hpp"
#include "edgeflow/window/frame.hpp"
#include "edgeflow/window/harmonize.hpp"

namespace edgeflow {

struct LateEvent {
  std::string environment_id;
  std::string signal_id;
  Timestamp event_time;
  Timestamp window_start;
  double value = 0.0;
};

nlohmann::json late_event_to_json(const LateEvent& e);

// Streaming accumulator and window manager for one environment. Owns all
// per-signal state; single-threaded by contract (one worker per environment).
//
// Frames are produced strictly in window order starting at the window that
// contains `run_start`. A measurement whose window has already closed (or
// precedes the first window) is late: it is reported and never merged.
class WindowManager {
 public:
  using LateSink = std::function<void(const LateEvent&)>;

  WindowManager(const EnvironmentConfig& config, Timestamp run_start, Metrics& metrics, LateSink on_late = {});

  void ingest(const Measurement& m);

  // Closes every window whose watermark (end + grace) is strictly before `now`.
  std::vector<WindowFrame> advance(Timestamp now);

  // Closes every window whose end is at or before `limit`, ignoring grace.
  std::vector<WindowFrame> close_through(Timestamp limit);

  Timestamp next_window_start() const { return next_start_; }
  const EnvironmentConfig& config() const { return config_; }

 private:
  struct SignalState {
    const SignalSpec* spec;
    std::optional<AnomalyBuffer> anomaly;
    SignalHistory history;
  };

  WindowFrame close_next();

  const EnvironmentConfig& config_;
  Metrics& metrics_;
  LateSink on_late_;
  Duration window_;
  Duration grace_;
  Duration horizon_;
  Timestamp next_start_;
  std::map<std::string, SignalState, std::less<>> signals_;
  // window start -> signal -> samples in arrival order
  std::map<Timestamp, std::map<std::string, std::vector<Sample>, std::less<>>> open_;
};

}  // namespace edgeflow
