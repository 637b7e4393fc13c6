#include "edgeflow/window/frame.hpp"

namespace edgeflow {

nlohmann::json frame_to_json(const WindowFrame& f) {
  nlohmann::json values = nlohmann::json::object();
  nlohmann::json qual = nlohmann::json::object();
  for (const auto& [signal, v] : f.values) {
    values[signal] = v.value;
    qual[signal] = to_string(v.quality);
  }
  return {{"env", f.environment_id},
          {"window_start", to_unix_seconds(f.window.start)},
          {"window_end", to_unix_seconds(f.window.end)},
          {"values", std::move(values)},
          {"qual", std::move(qual)},
          {"completeness", f.completeness},
          {"degraded", f.degraded}};
}

WindowFrame frame_from_json(const nlohmann::json& j) {
  WindowFrame f;
  f.environment_id = j.at("env").get<std::string>();
  f.window = {from_unix_seconds(j.at("window_start").get<std::int64_t>()),
              from_unix_seconds(j.at("window_end").get<std::int64_t>())};
  const auto& qual = j.at("qual");
  for (const auto& [signal, v] : j.at("values").items()) {
    const auto q = quality_from_string(qual.at(signal).get<std::string>());
    if (!q) throw Error("FrameFormatError", "bad quality for signal '" + signal + "'");
    f.values[signal] = {v.get<double>(), *q};
  }
  f.completeness = j.at("completeness").get<double>();
  f.degraded = j.at("degraded").get<bool>();
  return f;
}

}  // namespace edgeflow
