#include "edgeflow/runtime/runner.hpp"

#include <filesystem>

#include "edgeflow/ingest/router.hpp"
#include "edgeflow/sim/oracle.hpp"

namespace edgeflow::runtime {

namespace fs = std::filesystem;

RunResult run_trace(const Config& config, const sim::RawTrace& trace, const RunOptions& options) {
  Metrics metrics;
  Outputs outputs(options.out_dir, metrics);
  sim::write_trace(trace, (fs::path(outputs.dir()) / "trace.jsonl").string());

  Router router(config, metrics);
  std::vector<std::unique_ptr<EnvPipeline>> pipelines;
  for (const EnvironmentConfig& env : config.environments) {
    pipelines.push_back(std::make_unique<EnvPipeline>(env, trace.run_start, metrics, outputs,
                                                      build_model(env, options), options.forward_retry_delay));
  }

  for (const sim::TraceEvent& ev : trace.events) {
    for (auto& p : pipelines) p->advance(ev.arrival);
    try {
      router.submit({ev.source_id, ev.arrival, ev.payload, SourceKind::sim});
    } catch (const UnknownSource&) {
    } catch (const TranslateError&) {
    }
    for (auto& p : pipelines) {
      for (const Measurement& m : router.queue(p->config().environment_id).drain()) p->ingest(m);
    }
  }

  RunResult result;
  for (auto& p : pipelines) {
    p->close_through(trace.run_end);
    p->finish();
    result.frames[p->config().environment_id] = p->frames();
  }
  outputs.flush();
  result.metrics = metrics.snapshot();
  write_metrics(result.metrics, (fs::path(outputs.dir()) / "metrics.json").string());
  return result;
}

RunResult run_scenario(const Config& config, const sim::Scenario& scenario, const RunOptions& options) {
  return run_trace(config, sim::generate_trace(scenario, config), options);
}

std::map<std::string, std::vector<WindowFrame>> run_oracle(const Config& config, const sim::RawTrace& trace,
                                                           const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error("IoError", "cannot create output directory '" + out_dir + "': " + ec.message());
  auto frames = sim::oracle_resample(trace, config);
  JsonlWriter out((fs::path(out_dir) / "frames.jsonl").string());
  for (const EnvironmentConfig& env : config.environments) {
    for (const WindowFrame& f : frames[env.environment_id]) out.write(frame_to_json(f));
  }
  out.flush();
  return frames;
}

}  // namespace edgeflow::runtime
