#include "edgeflow/runtime/engine.hpp"

#include <filesystem>

namespace edgeflow::runtime {

namespace {

Timestamp wall_now() { return std::chrono::time_point_cast<Duration>(std::chrono::system_clock::now()); }

}  // namespace

Engine::Engine(const Config& config, RunOptions options)
    : config_(config),
      options_(std::move(options)),
      outputs_(options_.out_dir, metrics_),
      router_(config, metrics_),
      http_(router_, metrics_) {}

Engine::~Engine() { stop(); }

int Engine::start(const std::string& host, int http_port) {
  const Timestamp run_start = wall_now();
  for (const EnvironmentConfig& env : config_.environments) {
    pipelines_.push_back(std::make_unique<EnvPipeline>(env, run_start, metrics_, outputs_, build_model(env, options_),
                                                       options_.forward_retry_delay));
  }
  for (const SourceSpec& s : config_.sources) {
    if (s.kind == SourceKind::http) metrics_.set_source_status(s.source_id, ConnectionStatus::listening);
    if (s.kind == SourceKind::mqtt) mqtt_.push_back(std::make_unique<mqtt::Receiver>(s, router_, metrics_));
  }
  const int port = http_.start(host, http_port);
  for (auto& r : mqtt_) r->start();
  for (auto& p : pipelines_) {
    EnvQueue& q = router_.queue(p->config().environment_id);
    workers_.emplace_back([this, &p = *p, &q] { work(p, q); });
  }
  started_ = true;
  return port;
}

void Engine::work(EnvPipeline& pipeline, EnvQueue& queue) {
  while (!stopping_) {
    if (auto m = queue.pop_for(std::chrono::milliseconds(100))) {
      pipeline.ingest(*m);
      for (const Measurement& more : queue.drain()) pipeline.ingest(more);
    }
    pipeline.advance(wall_now());
  }
  for (const Measurement& m : queue.drain()) pipeline.ingest(m);
  pipeline.advance(wall_now());
  pipeline.finish();
}

void Engine::stop() {
  if (!started_) return;
  started_ = false;
  http_.stop();
  for (auto& r : mqtt_) r->stop();
  stopping_ = true;
  for (std::thread& t : workers_) t.join();
  workers_.clear();
  outputs_.flush();
  write_metrics(metrics_.snapshot(), (std::filesystem::path(outputs_.dir()) / "metrics.json").string());
}

}  // namespace edgeflow::runtime
