#pragma once

#include <string>
#include <vector>

#include "edgeflow/core/errors.hpp"
#include "edgeflow/core/types.hpp"
#include "edgeflow/sim/scenario.hpp"

namespace edgeflow::sim {

struct TraceEvent {
  std::string source_id;
  Timestamp arrival;
  std::string payload;
  bool operator==(const TraceEvent&) const = default;
};

struct SuppressedEmission {
  std::string source_id;
  Timestamp scheduled;
  bool operator==(const SuppressedEmission&) const = default;
};

// Everything a run consumed: emitted events in arrival order plus the
// emissions dropout suppressed. Frames cover [run_start, run_end).
struct RawTrace {
  Timestamp run_start{};
  Timestamp run_end{};
  std::vector<TraceEvent> events;
  std::vector<SuppressedEmission> suppressed;
  bool operator==(const RawTrace&) const = default;
};

class TraceFormatError : public Error {
 public:
  TraceFormatError(std::size_t line, const std::string& detail)
      : Error("TraceFormatError", "trace line " + std::to_string(line) + ": " + detail), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// JSON Lines: a header {"kind":"header","run_start_ns","run_end_ns"} then
// {"kind":"event","source","arrival_ns","payload"} and
// {"kind":"suppressed","source","scheduled_ns"} lines. An empty file is an
// empty trace.
void write_trace(const RawTrace& trace, const std::string& path);
RawTrace read_trace(const std::string& path);

// Seeded synthetic sources with jitter, dropout and spikes. Each source has
// its own generator seeded from (seed, source_id), so adding a source leaves
// the others' streams untouched. Event times are quantized to milliseconds.
RawTrace generate_trace(const Scenario& scenario, const Config& config);

}  // namespace edgeflow::sim
