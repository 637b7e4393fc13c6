#pragma once

#include <map>
#include <string>
#include <vector>

#include "edgeflow/egress/metrics.hpp"
#include "edgeflow/runtime/pipeline.hpp"
#include "edgeflow/sim/scenario.hpp"
#include "edgeflow/sim/trace.hpp"

namespace edgeflow::runtime {

struct RunResult {
  MetricsSnapshot metrics;
  std::map<std::string, std::vector<WindowFrame>> frames;  // per environment
};

// Logical-clock run over a recorded trace. Single-threaded: events are
// applied in arrival order and windows close as the clock passes their
// watermark (an event exactly on a watermark is applied first). Writes
// frames.jsonl, decisions.jsonl, late_events.jsonl, metrics.json, trace.jsonl
// and the transition logs into options.out_dir.
RunResult run_trace(const Config& config, const sim::RawTrace& trace, const RunOptions& options);

// generate_trace + run_trace.
RunResult run_scenario(const Config& config, const sim::Scenario& scenario, const RunOptions& options);

// Writes oracle_resample's frames to <out_dir>/frames.jsonl, environments in
// config order. Returns the frames.
std::map<std::string, std::vector<WindowFrame>> run_oracle(const Config& config, const sim::RawTrace& trace,
                                                           const std::string& out_dir);

}  // namespace edgeflow::runtime
