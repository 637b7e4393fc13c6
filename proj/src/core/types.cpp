#include "edgeflow/core/types.hpp"

#include <algorithm>

namespace edgeflow {

std::string_view to_string(Quality q) {
  switch (q) {
    case Quality::measured: return "measured";
    case Quality::corrected: return "corrected";
    case Quality::carried: return "carried";
    case Quality::predicted: return "predicted";
  }
  return "?";
}

std::optional<Quality> quality_from_string(std::string_view s) {
  for (Quality q : {Quality::measured, Quality::corrected, Quality::carried, Quality::predicted}) {
    if (to_string(q) == s) return q;
  }
  return std::nullopt;
}

std::string_view to_string(Aggregation a) {
  switch (a) {
    case Aggregation::last: return "last";
    case Aggregation::mean: return "mean";
    case Aggregation::sum: return "sum";
    case Aggregation::min: return "min";
    case Aggregation::max: return "max";
  }
  return "?";
}

std::string_view to_string(GapFill g) {
  switch (g) {
    case GapFill::locf: return "locf";
    case GapFill::linear: return "linear";
    case GapFill::historical_mean: return "historical_mean";
    case GapFill::fail: return "fail";
  }
  return "?";
}

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::stub_constant: return "stub_constant";
    case ModelKind::stub_linear: return "stub_linear";
    case ModelKind::sidecar_http: return "sidecar_http";
  }
  return "?";
}

std::string_view to_string(ForwarderKind k) {
  switch (k) {
    case ForwarderKind::log: return "log";
    case ForwarderKind::http_post: return "http_post";
    case ForwarderKind::mqtt_publish: return "mqtt_publish";
  }
  return "?";
}

std::string_view to_string(SourceKind k) {
  switch (k) {
    case SourceKind::sim: return "sim";
    case SourceKind::http: return "http";
    case SourceKind::mqtt: return "mqtt";
  }
  return "?";
}

const SignalSpec* EnvironmentConfig::find_signal(std::string_view id) const {
  const auto it = std::find_if(signals.begin(), signals.end(),
                               [&](const SignalSpec& s) { return s.signal_id == id; });
  return it == signals.end() ? nullptr : &*it;
}

const DerivedSignalSpec* EnvironmentConfig::find_derived(std::string_view id) const {
  const auto it = std::find_if(derived.begin(), derived.end(),
                               [&](const DerivedSignalSpec& d) { return d.signal_id == id; });
  return it == derived.end() ? nullptr : &*it;
}

std::vector<std::string> EnvironmentConfig::all_signal_ids() const {
  std::vector<std::string> ids;
  ids.reserve(signals.size() + derived.size());
  for (const auto& s : signals) ids.push_back(s.signal_id);
  for (const auto& d : derived) ids.push_back(d.signal_id);
  return ids;
}

const EnvironmentConfig* Config::find_environment(std::string_view id) const {
  const auto it = std::find_if(environments.begin(), environments.end(),
                               [&](const EnvironmentConfig& e) { return e.environment_id == id; });
  return it == environments.end() ? nullptr : &*it;
}

const SourceSpec* Config::find_source(std::string_view id) const {
  const auto it = std::find_if(sources.begin(), sources.end(),
                               [&](const SourceSpec& s) { return s.source_id == id; });
  return it == sources.end() ? nullptr : &*it;
}

}  // namespace edgeflow
