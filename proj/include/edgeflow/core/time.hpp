#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>

namespace edgeflow {

// All timestamps are UTC nanoseconds since the Unix epoch.
using Duration = std::chrono::nanoseconds;
using Timestamp = std::chrono::sys_time<Duration>;

constexpr std::int64_t kNanosPerSecond = 1'000'000'000;

constexpr Timestamp from_unix_nanos(std::int64_t ns) { return Timestamp{Duration{ns}}; }
constexpr Timestamp from_unix_seconds(std::int64_t s) { return from_unix_nanos(s * kNanosPerSecond); }
constexpr std::int64_t to_unix_nanos(Timestamp t) { return t.time_since_epoch().count(); }

// Floor to whole seconds; window boundaries are always whole seconds.
constexpr std::int64_t to_unix_seconds(Timestamp t) {
  const std::int64_t ns = to_unix_nanos(t);
  return ns >= 0 ? ns / kNanosPerSecond : -((-ns + kNanosPerSecond - 1) / kNanosPerSecond);
}

inline Duration seconds_to_duration(double s) {
  return Duration{static_cast<std::int64_t>(std::llround(s * 1e9))};
}

constexpr double duration_to_seconds(Duration d) { return static_cast<double>(d.count()) / 1e9; }

}  // namespace edgeflow
