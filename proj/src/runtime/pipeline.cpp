#include "edgeflow/runtime/pipeline.hpp"

#include <filesystem>
#include <fstream>

namespace edgeflow::runtime {

namespace fs = std::filesystem;

namespace {

std::string in_dir(const std::string& dir, const std::string& name) {
  fs::path p(name);
  if (p.is_relative()) p = fs::path(dir) / p;
  return p.string();
}

std::string prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("IoError", "cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

}  // namespace

Outputs::Outputs(const std::string& out_dir, Metrics& metrics)
    : dir_(prepare_dir(out_dir)),
      metrics_(metrics),
      frames_(in_dir(dir_, "frames.jsonl")),
      decisions_(in_dir(dir_, "decisions.jsonl")),
      late_(in_dir(dir_, "late_events.jsonl")) {}

TransitionStore& Outputs::store(const std::string& relative_path) {
  const std::string path = in_dir(dir_, relative_path);
  std::lock_guard lock(mu_);
  auto it = stores_.find(path);
  if (it == stores_.end()) {
    // Each run starts its transition log afresh.
    std::ofstream(path, std::ios::binary | std::ios::trunc);
    it = stores_.emplace(path, std::make_unique<TransitionStore>(path, metrics_)).first;
  }
  return *it->second;
}

void Outputs::flush() {
  frames_.flush();
  decisions_.flush();
  late_.flush();
}

std::unique_ptr<ModelClient> build_model(const EnvironmentConfig& env, const RunOptions& options) {
  if (options.model_factory) return options.model_factory(env);
  return make_model(env.model);
}

EnvPipeline::EnvPipeline(const EnvironmentConfig& env, Timestamp run_start, Metrics& metrics, Outputs& outputs,
                         std::unique_ptr<ModelClient> model, std::chrono::milliseconds forward_retry_delay)
    : env_(env),
      metrics_(metrics),
      outputs_(outputs),
      manager_(env, run_start, metrics, [&outputs](const LateEvent& e) { outputs.late_events().write(late_event_to_json(e)); }),
      predictor_(env, std::move(model), metrics),
      store_(outputs.store(env.store.path)),
      hub_(env.forwarders, outputs.dir(), metrics, forward_retry_delay) {}

void EnvPipeline::advance(Timestamp now) { handle(manager_.advance(now)); }

void EnvPipeline::close_through(Timestamp limit) { handle(manager_.close_through(limit)); }

void EnvPipeline::handle(const std::vector<WindowFrame>& frames) {
  for (const WindowFrame& f : frames) {
    outputs_.frames().write(frame_to_json(f));
    Predictor::StepResult r = predictor_.step(f);
    for (const Transition& t : r.transitions) store(t);
    if (r.decision) {
      outputs_.decisions().write(decision_to_json(*r.decision));
      hub_.forward(*r.decision);
    }
    frames_.push_back(f);
  }
}

void EnvPipeline::store(const Transition& t) { store_.append(t, env_.store); }

void EnvPipeline::finish() {
  if (auto t = predictor_.flush()) store(*t);
  hub_.drain();
  outputs_.flush();
}

void write_metrics(const MetricsSnapshot& snapshot, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IoError", "cannot open '" + path + "' for writing");
  out << snapshot.to_json().dump(2) << '\n';
}

}  // namespace edgeflow::runtime
