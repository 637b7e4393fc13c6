#include "edgeflow/inference/inference.hpp"

namespace edgeflow {

RewardFunction::RewardFunction(const std::string& text) : program_(expr::parse(text)) {}

double RewardFunction::compute(const WindowFrame& prev, const ActionMap& action, const WindowFrame& cur) const {
  std::vector<double> values;
  values.reserve(program_.slots().size());
  for (const std::string& name : program_.slots()) {
    const auto dot = name.find('.');
    const std::string ns = name.substr(0, dot);
    const std::string key = dot == std::string::npos ? std::string() : name.substr(dot + 1);
    if (ns == "cur" || ns == "next") {
      const WindowFrame& f = ns == "cur" ? prev : cur;
      const auto it = f.values.find(key);
      if (it == f.values.end()) throw expr::UnboundVariable(name);
      values.push_back(it->second.value);
    } else if (ns == "action") {
      const auto it = action.find(key);
      if (it == action.end()) throw expr::UnboundVariable(name);
      values.push_back(it->second);
    } else {
      throw expr::UnboundVariable(name);
    }
  }
  return program_.eval_slots(values);
}

double compute_reward(const std::string& expr_text, const WindowFrame& prev, const ActionMap& action,
                      const WindowFrame& cur) {
  return RewardFunction(expr_text).compute(prev, action, cur);
}

Predictor::Predictor(const EnvironmentConfig& env, std::unique_ptr<ModelClient> model, Metrics& metrics)
    : env_(env), model_(std::move(model)), metrics_(metrics), reward_(env.reward_expr) {}

Transition Predictor::make_transition(const Pending& p, std::optional<double> reward) const {
  Transition t;
  t.environment_id = env_.environment_id;
  t.window_start = p.frame.window.start;
  t.observation = p.frame.values;
  t.encoded = p.features.values;
  t.raw_action = p.decision.raw_action;
  t.action = p.decision.action;
  t.valid = p.decision.valid;
  t.fallback_used = p.decision.fallback_used;
  t.reward = reward;
  t.degraded = p.frame.degraded;
  return t;
}

Predictor::StepResult Predictor::step(const WindowFrame& frame) {
  StepResult result;

  if (pending_) {
    std::optional<double> reward;
    if (!frame.degraded) {
      try {
        reward = reward_.compute(pending_->frame, pending_->decision.action, frame);
      } catch (const expr::EvalError&) {
        metrics_.reward_errors.fetch_add(1, std::memory_order_relaxed);
      }
    }
    result.transitions.push_back(make_transition(*pending_, reward));
    pending_.reset();
  }

  if (frame.degraded) {
    // Logged for completeness of the observation record; no decision.
    Transition t;
    t.environment_id = env_.environment_id;
    t.window_start = frame.window.start;
    t.observation = frame.values;
    t.degraded = true;
    result.transitions.push_back(std::move(t));
    return result;
  }

  Pending next{frame, {frame.environment_id, frame.window.start, {}}, {}};
  std::optional<ActionMap> raw;
  try {
    next.features = encode(frame, env_);
    raw = model_->infer(next.features);
  } catch (const EncodeError&) {
    raw.reset();
  } catch (const ModelError&) {
    raw.reset();
  }

  Decision d = decide(raw, env_.model);
  d.environment_id = env_.environment_id;
  d.window_start = frame.window.start;
  metrics_.decisions_emitted.fetch_add(1, std::memory_order_relaxed);
  if (d.fallback_used) metrics_.fallbacks_used.fetch_add(1, std::memory_order_relaxed);

  next.decision = d;
  pending_ = std::move(next);
  result.decision = std::move(d);
  return result;
}

std::optional<Transition> Predictor::flush() {
  if (!pending_) return std::nullopt;
  Transition t = make_transition(*pending_, std::nullopt);
  pending_.reset();
  return t;
}

}  // namespace edgeflow
