#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "edgeflow/core/errors.hpp"
#include "edgeflow/core/time.hpp"
#include "edgeflow/core/types.hpp"

namespace edgeflow {

// Half-open [start, end).
struct WindowBounds {
  Timestamp start;
  Timestamp end;

  Timestamp midpoint() const { return start + (end - start) / 2; }
  bool operator==(const WindowBounds&) const = default;
};

class TimestampBeforeOrigin : public Error {
 public:
  TimestampBeforeOrigin() : Error("TimestampBeforeOrigin", "event time precedes the epoch origin") {}
};

// window_start = origin + floor((t - origin) / W) * W. A timestamp on a
// boundary belongs to the later window.
WindowBounds assign_window(Timestamp event_time, Duration window, Timestamp origin);

struct FrameValue {
  double value = 0.0;
  Quality quality = Quality::measured;
  bool operator==(const FrameValue&) const = default;
};

struct WindowFrame {
  std::string environment_id;
  WindowBounds window;
  std::map<std::string, FrameValue> values;
  double completeness = 0.0;
  bool degraded = false;

  bool operator==(const WindowFrame&) const = default;
};

// Frames-file line: {"completeness","degraded","env","qual","values","window_end","window_start"}.
nlohmann::json frame_to_json(const WindowFrame& f);
WindowFrame frame_from_json(const nlohmann::json& j);

}  // namespace edgeflow
