#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "edgeflow/core/types.hpp"
#include "edgeflow/egress/egress.hpp"
#include "edgeflow/egress/metrics.hpp"
#include "edgeflow/inference/inference.hpp"
#include "edgeflow/window/window_manager.hpp"

namespace edgeflow::runtime {

using ModelFactory = std::function<std::unique_ptr<ModelClient>(const EnvironmentConfig&)>;

struct RunOptions {
  std::string out_dir = ".";
  // Overrides make_model, e.g. to inject a misbehaving model in tests.
  ModelFactory model_factory;
  std::chrono::milliseconds forward_retry_delay{250};
};

// Run artifacts shared by all environments of one run: frames, decisions and
// late-event logs plus one transition store per distinct StoreSpec path.
class Outputs {
 public:
  explicit Outputs(const std::string& out_dir, Metrics& metrics);

  JsonlWriter& frames() { return frames_; }
  JsonlWriter& decisions() { return decisions_; }
  JsonlWriter& late_events() { return late_; }
  TransitionStore& store(const std::string& relative_path);
  const std::string& dir() const { return dir_; }
  void flush();

 private:
  std::string dir_;
  Metrics& metrics_;
  JsonlWriter frames_;
  JsonlWriter decisions_;
  JsonlWriter late_;
  std::mutex mu_;
  std::map<std::string, std::unique_ptr<TransitionStore>> stores_;
};

// Window manager, predictor, transition store and forwarders for one
// environment. Single-threaded by contract.
class EnvPipeline {
 public:
  EnvPipeline(const EnvironmentConfig& env, Timestamp run_start, Metrics& metrics, Outputs& outputs,
              std::unique_ptr<ModelClient> model, std::chrono::milliseconds forward_retry_delay);

  void ingest(const Measurement& m) { manager_.ingest(m); }
  void advance(Timestamp now);
  void close_through(Timestamp limit);
  // Flushes the pending transition (reward null) and waits for forwarders.
  void finish();

  const std::vector<WindowFrame>& frames() const { return frames_; }
  const EnvironmentConfig& config() const { return env_; }

 private:
  void handle(const std::vector<WindowFrame>& frames);
  void store(const Transition& t);

  const EnvironmentConfig& env_;
  Metrics& metrics_;
  Outputs& outputs_;
  WindowManager manager_;
  Predictor predictor_;
  TransitionStore& store_;
  ForwardingHub hub_;
  std::vector<WindowFrame> frames_;
};

std::unique_ptr<ModelClient> build_model(const EnvironmentConfig& env, const RunOptions& options);

void write_metrics(const MetricsSnapshot& snapshot, const std::string& path);

}  // namespace edgeflow::runtime
