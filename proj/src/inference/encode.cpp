#include <algorithm>
#include <cmath>

#include "edgeflow/inference/inference.hpp"

namespace edgeflow {

double normalize(double x, const Normalization& n) {
  switch (n.kind) {
    case Normalization::Kind::minmax:
      return std::clamp((x - n.min) / (n.max - n.min), 0.0, 1.0);
    case Normalization::Kind::zscore:
      return (x - n.mean) / n.std;
    case Normalization::Kind::none:
      break;
  }
  return x;
}

double decode_norm(double y, const Normalization& n) {
  switch (n.kind) {
    case Normalization::Kind::minmax:
      return n.min + y * (n.max - n.min);
    case Normalization::Kind::zscore:
      return n.mean + y * n.std;
    case Normalization::Kind::none:
      break;
  }
  return y;
}

FeatureVector encode(const WindowFrame& frame, const EnvironmentConfig& env) {
  FeatureVector fv{frame.environment_id, frame.window.start, {}};
  fv.values.reserve(env.model.features.size());
  for (const std::string& name : env.model.features) {
    const auto it = frame.values.find(name);
    if (it == frame.values.end()) throw EncodeError("MissingFeature", "frame has no feature '" + name + "'");
    const SignalSpec* spec = env.find_signal(name);
    const double y = spec ? normalize(it->second.value, spec->normalization) : it->second.value;
    if (!std::isfinite(y)) throw EncodeError("NonFiniteEncoding", "feature '" + name + "' encoded to a non-finite value");
    fv.values.push_back(y);
  }
  return fv;
}

}  // namespace edgeflow
