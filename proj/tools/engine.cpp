#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "edgeflow/core/config.hpp"
#include "edgeflow/runtime/engine.hpp"
#include "edgeflow/runtime/runner.hpp"
#include "edgeflow/sim/scenario.hpp"
#include "edgeflow/sim/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct ConfigFailure {
  std::string message;
};

edgeflow::Config load_valid_config(const std::string& path) {
  edgeflow::Config config;
  try {
    config = edgeflow::load_config_file(path);
  } catch (const edgeflow::Error& e) {
    throw ConfigFailure{e.what()};
  }
  const auto violations = edgeflow::validate_config(config);
  if (!violations.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& v : violations) msg += "\n  " + v.path + ": " + v.message;
    throw ConfigFailure{msg};
  }
  return config;
}

int serve(const edgeflow::Config& config, const std::string& host, int port, const std::string& out_dir) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  edgeflow::runtime::Engine engine(config, {out_dir, {}, std::chrono::milliseconds(250)});
  const int bound = engine.start(host, port);
  std::cerr << "listening on " << host << ":" << bound << '\n';
  int sig = 0;
  sigwait(&set, &sig);
  engine.stop();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge stream-processing engine"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";

  auto* run = app.add_subcommand("run", "Serve live sources until SIGINT/SIGTERM");
  int http_port = 8080;
  std::string host = "0.0.0.0";
  run->add_option("--config", config_path, "Configuration file")->required();
  run->add_option("--http-port", http_port, "HTTP ingest/status port");
  run->add_option("--host", host, "HTTP bind address");
  run->add_option("--out", out_dir, "Directory for run artifacts");

  auto* simulate = app.add_subcommand("simulate", "Run a seeded scenario on the logical clock");
  std::string scenario_path;
  std::uint64_t seed = 0;
  bool logical_clock = false;
  simulate->add_option("--config", config_path, "Configuration file")->required();
  simulate->add_option("--scenario", scenario_path, "Scenario file")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();
  auto* seed_opt = simulate->add_option("--seed", seed, "Override the scenario seed");
  simulate->add_flag("--logical-clock", logical_clock, "Use the logical clock (always on for simulation)");

  std::string trace_path;
  auto* replay = app.add_subcommand("replay", "Re-run a recorded trace through the pipeline");
  replay->add_option("--config", config_path, "Configuration file")->required();
  replay->add_option("--trace", trace_path, "Trace file")->required();
  replay->add_option("--out", out_dir, "Output directory")->required();

  auto* oracle = app.add_subcommand("oracle", "Resample a recorded trace with the offline oracle");
  oracle->add_option("--config", config_path, "Configuration file")->required();
  oracle->add_option("--trace", trace_path, "Trace file")->required();
  oracle->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    const edgeflow::Config config = load_valid_config(config_path);
    if (*run) return serve(config, host, http_port, out_dir);

    if (*simulate) {
      edgeflow::sim::Scenario scenario;
      try {
        scenario = edgeflow::sim::load_scenario_file(scenario_path);
        if (*seed_opt) scenario.seed = seed;
        edgeflow::sim::check_scenario(scenario, config);
      } catch (const edgeflow::Error& e) {
        throw ConfigFailure{std::string("scenario: ") + e.what()};
      }
      edgeflow::runtime::run_scenario(config, scenario, {out_dir, {}, std::chrono::milliseconds(250)});
      return kExitOk;
    }

    edgeflow::sim::RawTrace trace;
    try {
      trace = edgeflow::sim::read_trace(trace_path);
    } catch (const edgeflow::Error& e) {
      throw ConfigFailure{std::string("trace: ") + e.what()};
    }
    if (*replay) {
      edgeflow::runtime::run_trace(config, trace, {out_dir, {}, std::chrono::milliseconds(250)});
    } else {
      edgeflow::runtime::run_oracle(config, trace, out_dir);
    }
    return kExitOk;
  } catch (const ConfigFailure& e) {
    std::cerr << "error: " << e.message << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
