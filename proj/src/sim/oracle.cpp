#include "edgeflow/sim/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "edgeflow/ingest/translator.hpp"

namespace edgeflow::sim {

namespace {

struct Point {
  std::int64_t t;  // ns since unix epoch
  double value;
  Quality quality;
};

struct Slot {
  bool present = false;
  double value = 0.0;
  Quality quality = Quality::predicted;
};

double middle_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// True when some whole-day shift of t lands in [lo, hi).
bool same_slot(std::int64_t t, std::int64_t lo, std::int64_t hi, std::int64_t day) {
  const std::int64_t k = -floor_div(t - lo, day);
  return t + k * day < hi;
}

class SignalOracle {
 public:
  explicit SignalOracle(const SignalSpec& spec) : spec_(spec) {}

  void add(std::int64_t window_start, std::size_t order, std::int64_t t, double v) {
    pending_[window_start].push_back({order, t, v});
  }

  // Resolves one window given every earlier window already resolved.
  Slot resolve(std::int64_t start, std::int64_t end, const EnvironmentConfig& env, std::string& gap_policy) {
    gap_policy.clear();
    std::vector<Raw> raw = std::move(pending_[start]);
    pending_.erase(start);
    std::sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) { return a.t != b.t ? a.t < b.t : a.order < b.order; });

    if (!raw.empty()) {
      std::vector<Point> pts;
      for (const Raw& r : raw) {
        Point p{r.t, r.v, Quality::measured};
        if (spec_.anomaly) {
          const std::size_t cap = static_cast<std::size_t>(spec_.anomaly->buffer_len);
          if (recent_.size() >= 5) {
            const double med = middle_of(recent_);
            std::vector<double> dev;
            for (double x : recent_) dev.push_back(std::fabs(x - med));
            const double mad = middle_of(dev);
            const double z = std::fabs(p.value - med) / (1.4826 * mad + 1e-9);
            if (z > spec_.anomaly->z_threshold) p = {p.t, med, Quality::corrected};
          }
          recent_.push_back(p.value);
          if (recent_.size() > cap) recent_.erase(recent_.begin());
        }
        pts.push_back(p);
      }
      Slot out{true, 0.0, Quality::measured};
      for (const Point& p : pts) out.quality = worst(out.quality, p.quality);
      switch (spec_.aggregation) {
        case Aggregation::last: {
          const Point& last = pts.back();
          out.value = last.value;
          out.quality = last.quality;
          break;
        }
        case Aggregation::mean:
        case Aggregation::sum: {
          double s = pts[0].value;
          for (std::size_t i = 1; i < pts.size(); ++i) s += pts[i].value;
          out.value = spec_.aggregation == Aggregation::mean ? s / static_cast<double>(pts.size()) : s;
          break;
        }
        case Aggregation::min:
        case Aggregation::max: {
          double m = pts[0].value;
          for (const Point& p : pts) {
            if (spec_.aggregation == Aggregation::min ? p.value < m : m < p.value) m = p.value;
          }
          out.value = m;
          break;
        }
      }
      seen_.insert(seen_.end(), pts.begin(), pts.end());
      return out;
    }

    const std::int64_t mid = start + (end - start) / 2;
    auto carry = [&]() -> Slot {
      if (seen_.empty()) return {};
      const Point& last = seen_.back();
      if (spec_.max_staleness_s && start - last.t > seconds_to_duration(*spec_.max_staleness_s).count()) return {};
      gap_policy = "locf";
      return {true, last.value, Quality::carried};
    };

    switch (spec_.gap_fill) {
      case GapFill::fail:
        return {};
      case GapFill::locf:
        return carry();
      case GapFill::linear: {
        if (seen_.size() >= 2) {
          const Point& a = seen_[seen_.size() - 2];
          const Point& b = seen_.back();
          double v = b.value;
          if (a.t != b.t) {
            v = a.value + (b.value - a.value) * static_cast<double>(mid - a.t) / static_cast<double>(b.t - a.t);
          }
          if (spec_.bounds) v = std::min(std::max(v, spec_.bounds->min), spec_.bounds->max);
          if (!std::isfinite(v)) return {};
          gap_policy = "linear";
          return {true, v, Quality::predicted};
        }
        return carry();
      }
      case GapFill::historical_mean: {
        const std::int64_t day = env.day_seconds * kNanosPerSecond;
        const std::int64_t cutoff = start - day * env.history_days;
        const std::int64_t half = (end - start) / 2;
        double sum = 0.0;
        std::size_t n = 0;
        for (const Point& p : seen_) {
          if (p.t < cutoff) continue;
          if (same_slot(p.t, mid - half, mid + half, day)) {
            sum += p.value;
            ++n;
          }
        }
        if (n) {
          gap_policy = "historical_mean";
          return {true, sum / static_cast<double>(n), Quality::predicted};
        }
        return carry();
      }
    }
    return {};
  }

 private:
  struct Raw {
    std::size_t order;
    std::int64_t t;
    double v;
  };
  const SignalSpec& spec_;
  std::map<std::int64_t, std::vector<Raw>> pending_;
  std::vector<double> recent_;
  std::vector<Point> seen_;
};

}  // namespace

std::map<std::string, std::vector<WindowFrame>> oracle_resample(const RawTrace& trace, const Config& config) {
  std::map<std::string, std::vector<WindowFrame>> result;
  const std::int64_t run_start = to_unix_nanos(trace.run_start);
  const std::int64_t run_end = to_unix_nanos(trace.run_end);

  for (const EnvironmentConfig& env : config.environments) {
    const std::int64_t origin = to_unix_nanos(env.epoch_origin);
    const std::int64_t w = env.window_seconds * kNanosPerSecond;
    const std::int64_t grace = seconds_to_duration(env.grace_seconds).count();
    const std::int64_t first = origin + floor_div(std::max(run_start, origin) - origin, w) * w;

    std::map<std::string, SignalOracle> signals;
    for (const SignalSpec& s : env.signals) signals.emplace(s.signal_id, SignalOracle(s));

    for (std::size_t i = 0; i < trace.events.size(); ++i) {
      const TraceEvent& ev = trace.events[i];
      const SourceSpec* src = config.find_source(ev.source_id);
      if (!src || std::find(src->environments.begin(), src->environments.end(), env.environment_id) == src->environments.end()) {
        continue;
      }
      auto sig = signals.find(src->translator.signal_id);
      if (sig == signals.end()) continue;

      Timestamp earliest{};
      for (const std::string& e : src->environments) {
        if (const EnvironmentConfig* ec = config.find_environment(e)) earliest = std::max(earliest, ec->epoch_origin);
      }
      Measurement m;
      try {
        m = translate({ev.source_id, ev.arrival, ev.payload, src->kind}, src->translator, earliest);
      } catch (const TranslateError&) {
        continue;
      }
      const std::int64_t t = to_unix_nanos(m.event_time);
      if (t < origin) continue;
      const std::int64_t ws = origin + floor_div(t - origin, w) * w;
      const std::int64_t arrival = to_unix_nanos(ev.arrival);
      if (ws < first || ws + w + grace < arrival) continue;
      sig->second.add(ws, i, t, m.value);
    }

    std::vector<WindowFrame>& frames = result[env.environment_id];
    std::string policy;
    for (std::int64_t ws = first; ws + w <= run_end; ws += w) {
      WindowFrame f;
      f.environment_id = env.environment_id;
      f.window = {from_unix_nanos(ws), from_unix_nanos(ws + w)};
      std::map<std::string, Slot> slots;
      std::size_t good = 0;
      for (const SignalSpec& s : env.signals) {
        const Slot slot = signals.at(s.signal_id).resolve(ws, ws + w, env, policy);
        if (!slot.present) f.degraded = true;
        if (slot.present && (slot.quality == Quality::measured || slot.quality == Quality::corrected)) ++good;
        f.values[s.signal_id] = slot.present ? FrameValue{slot.value, slot.quality} : FrameValue{0.0, Quality::predicted};
        slots[s.signal_id] = slot;
      }
      for (const DerivedSignalSpec& d : env.derived) {
        double num = 0.0;
        double den = 0.0;
        Quality q = Quality::measured;
        bool ok = true;
        for (const DerivedMember& m : d.members) {
          const Slot& s = slots.at(m.signal_id);
          if (!s.present) {
            ok = false;
            break;
          }
          num += m.weight * s.value;
          den += m.weight;
          q = worst(q, s.quality);
        }
        if (!ok) f.degraded = true;
        f.values[d.signal_id] = ok ? FrameValue{num / den, q} : FrameValue{0.0, Quality::predicted};
      }
      f.completeness = env.signals.empty() ? 0.0 : static_cast<double>(good) / static_cast<double>(env.signals.size());
      frames.push_back(std::move(f));
    }
  }
  return result;
}

}  // namespace edgeflow::sim
