#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgeflow/core/errors.hpp"
#include "edgeflow/core/types.hpp"
#include "edgeflow/egress/metrics.hpp"
#include "edgeflow/expr/expr.hpp"
#include "edgeflow/window/frame.hpp"

namespace edgeflow {

struct FeatureVector {
  std::string environment_id;
  Timestamp window_start;
  std::vector<double> values;  // ModelSpec.features order
};

class EncodeError : public Error {
 public:
  using Error::Error;
};

double normalize(double x, const Normalization& n);
// Inverse affine map of `normalize` (ignoring minmax clamping).
double decode_norm(double y, const Normalization& n);

// Throws EncodeError("MissingFeature" | "NonFiniteEncoding").
FeatureVector encode(const WindowFrame& frame, const EnvironmentConfig& env);

using ActionMap = std::map<std::string, double>;

class ModelError : public Error {
 public:
  using Error::Error;
};

class ModelClient {
 public:
  virtual ~ModelClient() = default;
  // Throws ModelError ("ModelTimeout", "ModelUnreachable", "ModelBadResponse").
  virtual ActionMap infer(const FeatureVector& fv) = 0;
};

class ConstantModel final : public ModelClient {
 public:
  explicit ConstantModel(const ModelSpec& spec) : spec_(spec) {}
  ActionMap infer(const FeatureVector& fv) override;

 private:
  const ModelSpec& spec_;
};

// clamp(sum_i w_i * fv_i + b, min, max) per action.
class LinearModel final : public ModelClient {
 public:
  explicit LinearModel(const ModelSpec& spec) : spec_(spec) {}
  ActionMap infer(const FeatureVector& fv) override;

 private:
  const ModelSpec& spec_;
};

// Out-of-process model over HTTP:
//   POST {endpoint}/act  {"env", "window_start" (unix s), "features": {name: x}}
//   200 {"action": {name: x}} with exactly the configured action names.
class SidecarModel final : public ModelClient {
 public:
  explicit SidecarModel(const ModelSpec& spec);
  ActionMap infer(const FeatureVector& fv) override;
  bool healthy();

  nlohmann::json request_body(const FeatureVector& fv) const;
  // Validates a response body against the configured actions.
  ActionMap parse_response(int status, const std::string& body) const;

 private:
  const ModelSpec& spec_;
  std::string base_;    // scheme://host:port
  std::string prefix_;  // optional path prefix
};

std::unique_ptr<ModelClient> make_model(const ModelSpec& spec);

struct Decision {
  std::string environment_id;
  Timestamp window_start;
  ActionMap raw_action;
  ActionMap action;
  bool valid = false;
  bool fallback_used = false;
};

nlohmann::json decision_to_json(const Decision& d);

// Range/finiteness validation. `raw` is nullopt when the model failed.
Decision decide(const std::optional<ActionMap>& raw, const ModelSpec& spec);

// Reward over the fixed namespaces cur.* (frame acted on), next.* (the
// following frame) and action.* (decision taken at cur).
class RewardFunction {
 public:
  explicit RewardFunction(const std::string& text);
  // Throws expr::EvalError.
  double compute(const WindowFrame& prev, const ActionMap& action, const WindowFrame& cur) const;

 private:
  expr::Program program_;
};

double compute_reward(const std::string& expr_text, const WindowFrame& prev, const ActionMap& action,
                      const WindowFrame& cur);

struct Transition {
  std::string environment_id;
  Timestamp window_start;
  std::map<std::string, FrameValue> observation;
  std::vector<double> encoded;
  ActionMap raw_action;
  ActionMap action;
  bool valid = false;
  bool fallback_used = false;
  std::optional<double> reward;
  bool degraded = false;
};

// The Predictor for one environment. Holds the last (frame, decision) until
// the next frame supplies the successor state for its reward.
class Predictor {
 public:
  Predictor(const EnvironmentConfig& env, std::unique_ptr<ModelClient> model, Metrics& metrics);

  struct StepResult {
    std::optional<Decision> decision;
    // In window order: the completed pending transition, then a record for
    // this frame if it was degraded.
    std::vector<Transition> transitions;
  };

  StepResult step(const WindowFrame& frame);
  // Shutdown: the pending transition, reward null.
  std::optional<Transition> flush();

 private:
  struct Pending {
    WindowFrame frame;
    FeatureVector features;
    Decision decision;
  };

  Transition make_transition(const Pending& p, std::optional<double> reward) const;

  const EnvironmentConfig& env_;
  std::unique_ptr<ModelClient> model_;
  Metrics& metrics_;
  RewardFunction reward_;
  std::optional<Pending> pending_;
};

}  // namespace edgeflow
