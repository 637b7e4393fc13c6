#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "edgeflow/core/errors.hpp"
#include "edgeflow/core/types.hpp"

namespace edgeflow::sim {

struct Generator {
  enum class Kind { constant, sine, random_walk };
  Kind kind = Kind::constant;
  double value = 0.0;        // constant
  double amplitude = 0.0;    // sine
  double period_s = 86400;   // sine
  double offset = 0.0;       // sine
  double step_sigma = 0.0;   // random_walk
  double start = 0.0;        // random_walk
};

struct ScenarioSource {
  std::string source_id;
  std::string signal_id;
  double period_s = 0.0;
  double jitter_s = 0.0;
  double dropout_p = 0.0;
  double spike_p = 0.0;
  double spike_magnitude = 0.0;
  Generator generator;
};

struct Scenario {
  double duration_s = 0.0;
  std::uint64_t seed = 0;
  bool logical_clock = true;
  std::int64_t start_s = 0;  // unix seconds of simulated time zero
  std::vector<ScenarioSource> sources;
};

// Throws ParseError / SchemaError like the config loader.
Scenario load_scenario(std::string_view text);
Scenario load_scenario_file(const std::string& path);

// Cross-checks a scenario against the config it will drive.
void check_scenario(const Scenario& scenario, const Config& config);

}  // namespace edgeflow::sim
