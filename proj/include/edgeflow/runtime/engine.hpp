#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "edgeflow/egress/metrics.hpp"
#include "edgeflow/ingest/http_receiver.hpp"
#include "edgeflow/ingest/mqtt.hpp"
#include "edgeflow/ingest/router.hpp"
#include "edgeflow/runtime/pipeline.hpp"

namespace edgeflow::runtime {

// Live mode: HTTP and MQTT receivers feed per-environment workers that close
// windows on the wall clock.
class Engine {
 public:
  Engine(const Config& config, RunOptions options);
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Returns the bound HTTP port (port 0 picks a free one).
  int start(const std::string& host, int http_port);
  // Stops receivers, flushes pending transitions and writes metrics.json.
  void stop();

  Metrics& metrics() { return metrics_; }

 private:
  void work(EnvPipeline& pipeline, EnvQueue& queue);

  const Config& config_;
  RunOptions options_;
  Metrics metrics_;
  Outputs outputs_;
  Router router_;
  HttpReceiver http_;
  std::vector<std::unique_ptr<mqtt::Receiver>> mqtt_;
  std::vector<std::unique_ptr<EnvPipeline>> pipelines_;
  std::vector<std::thread> workers_;
  std::atomic<bool> stopping_{false};
  bool started_ = false;
};

}  // namespace edgeflow::runtime
