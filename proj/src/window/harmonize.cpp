#include "edgeflow/window/harmonize.hpp"

#include <algorithm>
#include <cmath>

namespace edgeflow {

WindowBounds assign_window(Timestamp event_time, Duration window, Timestamp origin) {
  if (event_time < origin) throw TimestampBeforeOrigin();
  const auto offset = (event_time - origin).count();
  const auto w = window.count();
  const Timestamp start = origin + Duration{(offset / w) * w};
  return {start, start + window};
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t n = values.size();
  std::sort(values.begin(), values.end());
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

double median_absolute_deviation(const std::vector<double>& values) {
  const double m = median(values);
  std::vector<double> dev;
  dev.reserve(values.size());
  for (double v : values) dev.push_back(std::fabs(v - m));
  return median(std::move(dev));
}

FrameValue detect_and_correct(double x, AnomalyBuffer& buffer, const AnomalyParams& params) {
  FrameValue out{x, Quality::measured};
  if (buffer.size() >= kMinAnomalySamples) {
    const std::vector<double> window = buffer.values();
    const double center = median(window);
    const double z = std::fabs(x - center) / (kMadScale * median_absolute_deviation(window) + kMadEpsilon);
    if (z > params.z_threshold) out = {center, Quality::corrected};
  }
  buffer.push(out.value);
  return out;
}

FrameValue aggregate(std::span<const Sample> samples, Aggregation method) {
  if (samples.empty()) throw NoSamples();

  if (method == Aggregation::last) {
    const Sample* best = &samples.front();
    for (const Sample& s : samples) {
      if (s.time >= best->time) best = &s;
    }
    return {best->value, best->quality};
  }

  Quality q = Quality::measured;
  for (const Sample& s : samples) q = worst(q, s.quality);

  double acc = samples.front().value;
  switch (method) {
    case Aggregation::mean:
    case Aggregation::sum:
      for (std::size_t i = 1; i < samples.size(); ++i) acc += samples[i].value;
      if (method == Aggregation::mean) acc /= static_cast<double>(samples.size());
      break;
    case Aggregation::min:
      for (const Sample& s : samples) acc = s.value < acc ? s.value : acc;
      break;
    case Aggregation::max:
      for (const Sample& s : samples) acc = acc < s.value ? s.value : acc;
      break;
    case Aggregation::last:
      break;
  }
  return {acc, q};
}

void SignalHistory::record(const Sample& s) {
  if (last_good.size() == 2) last_good.erase(last_good.begin());
  last_good.push_back(s);
  if (keep_history) history.push_back(s);
}

void SignalHistory::prune_before(Timestamp cutoff) {
  while (!history.empty() && history.front().time < cutoff) history.pop_front();
}

namespace {

std::optional<FrameValue> carry_forward(const SignalSpec& signal, const GapContext& ctx, const SignalHistory& state) {
  if (state.last_good.empty()) return std::nullopt;
  const Sample& last = state.last_good.back();
  if (signal.max_staleness_s && ctx.window.start - last.time > seconds_to_duration(*signal.max_staleness_s)) {
    return std::nullopt;
  }
  return FrameValue{last.value, Quality::carried};
}

// Signed offset of `t` from `reference` on the day circle, in [-day/2, day/2).
std::int64_t day_phase_offset(Timestamp t, Timestamp reference, const GapContext& ctx) {
  const std::int64_t day = ctx.day.count();
  auto phase = [&](Timestamp x) {
    const std::int64_t r = (x - ctx.epoch_origin).count() % day;
    return r < 0 ? r + day : r;
  };
  std::int64_t d = phase(t) - phase(reference) + day / 2;
  d %= day;
  if (d < 0) d += day;
  return d - day / 2;
}

}  // namespace

GapResult fill_gap(const SignalSpec& signal, const GapContext& ctx, const SignalHistory& state) {
  switch (signal.gap_fill) {
    case GapFill::fail:
      break;

    case GapFill::locf:
      if (auto v = carry_forward(signal, ctx, state)) return {*v, GapFill::locf};
      break;

    case GapFill::linear: {
      if (state.last_good.size() == 2) {
        const Sample& a = state.last_good[0];
        const Sample& b = state.last_good[1];
        double v = b.value;
        if (b.time != a.time) {
          const double span = static_cast<double>((b.time - a.time).count());
          const double ahead = static_cast<double>((ctx.window.midpoint() - a.time).count());
          v = a.value + (b.value - a.value) * ahead / span;
        }
        if (signal.bounds) v = std::clamp(v, signal.bounds->min, signal.bounds->max);
        if (std::isfinite(v)) return {{v, Quality::predicted}, GapFill::linear};
      }
      // A single point cannot define a slope; carry it instead.
      if (state.last_good.size() == 1) {
        if (auto v = carry_forward(signal, ctx, state)) return {*v, GapFill::locf};
      }
      break;
    }

    case GapFill::historical_mean: {
      const std::int64_t half = (ctx.window.end - ctx.window.start).count() / 2;
      const Timestamp mid = ctx.window.midpoint();
      double sum = 0.0;
      std::size_t n = 0;
      for (const Sample& s : state.history) {
        const std::int64_t d = day_phase_offset(s.time, mid, ctx);
        if (d >= -half && d < half) {
          sum += s.value;
          ++n;
        }
      }
      if (n > 0) return {{sum / static_cast<double>(n), Quality::predicted}, GapFill::historical_mean};
      if (auto v = carry_forward(signal, ctx, state)) return {*v, GapFill::locf};
      break;
    }
  }
  throw GapUnfillable(signal.signal_id);
}

FrameValue fuse(std::span<const FusionInput> members) {
  double weighted = 0.0;
  double total = 0.0;
  Quality q = Quality::measured;
  for (const FusionInput& m : members) {
    if (!m.value) throw MemberUnresolved(m.signal_id);
    weighted += m.weight * m.value->value;
    total += m.weight;
    q = worst(q, m.value->quality);
  }
  return {weighted / total, q};
}

}  // namespace edgeflow
