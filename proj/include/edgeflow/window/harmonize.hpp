#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "edgeflow/core/errors.hpp"
#include "edgeflow/core/types.hpp"
#include "edgeflow/window/frame.hpp"

// Per-signal building blocks of window close: anomaly correction,
// aggregation, gap filling and fusion.
namespace edgeflow {

struct Sample {
  Timestamp time;
  double value = 0.0;
  Quality quality = Quality::measured;
  bool operator==(const Sample&) const = default;
};

double median(std::vector<double> values);
// Median absolute deviation around the median.
double median_absolute_deviation(const std::vector<double>& values);

// Trailing ring of accepted (post-correction) values.
class AnomalyBuffer {
 public:
  explicit AnomalyBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(double v) {
    if (values_.size() == capacity_) values_.pop_front();
    values_.push_back(v);
  }
  std::size_t size() const { return values_.size(); }
  std::vector<double> values() const { return {values_.begin(), values_.end()}; }

 private:
  std::size_t capacity_;
  std::deque<double> values_;
};

constexpr std::size_t kMinAnomalySamples = 5;
constexpr double kMadScale = 1.4826;
constexpr double kMadEpsilon = 1e-9;

// Robust z-score spike check. With fewer than kMinAnomalySamples buffered
// values the sample passes unchanged. The accepted value is pushed.
FrameValue detect_and_correct(double x, AnomalyBuffer& buffer, const AnomalyParams& params);

class NoSamples : public Error {
 public:
  NoSamples() : Error("NoSamples", "aggregate called with no samples") {}
};

// Samples must be in acceptance order; `last` picks the greatest time, later
// position on ties. Quality is that of the picked sample for `last`,
// otherwise the worst sample quality.
FrameValue aggregate(std::span<const Sample> samples, Aggregation method);

class GapUnfillable : public Error {
 public:
  explicit GapUnfillable(const std::string& signal)
      : Error("GapUnfillable", "no value can be produced for signal '" + signal + "'") {}
};

// Everything gap filling needs to know about a signal's past.
struct SignalHistory {
  // Up to the last two accepted samples, oldest first.
  std::vector<Sample> last_good;
  // Accepted samples inside the history horizon, oldest first. Only kept
  // for signals whose policy reads it.
  std::deque<Sample> history;
  bool keep_history = false;

  void record(const Sample& s);
  void prune_before(Timestamp cutoff);
};

struct GapContext {
  WindowBounds window;
  Timestamp epoch_origin;
  Duration day;
};

struct GapResult {
  FrameValue value;
  GapFill policy_used;
};

// Throws GapUnfillable when the policy is `fail` or no fallback data exists.
GapResult fill_gap(const SignalSpec& signal, const GapContext& ctx, const SignalHistory& state);

class MemberUnresolved : public Error {
 public:
  explicit MemberUnresolved(const std::string& member)
      : Error("MemberUnresolved", "fusion member '" + member + "' is unresolved") {}
};

struct FusionInput {
  std::string signal_id;
  std::optional<FrameValue> value;  // nullopt when the member was unfillable
  double weight = 1.0;
};

// Weighted mean; quality is the worst member quality.
FrameValue fuse(std::span<const FusionInput> members);

}  // namespace edgeflow
