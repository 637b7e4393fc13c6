#include <algorithm>
#include <chrono>
#include <cmath>

#include <httplib.h>

#include "edgeflow/inference/inference.hpp"

namespace edgeflow {

using nlohmann::json;

namespace {

ModelError bad_response(const std::string& detail) { return ModelError("ModelBadResponse", detail); }

}  // namespace

ActionMap ConstantModel::infer(const FeatureVector&) {
  ActionMap out;
  for (const ActionSpec& a : spec_.actions) out[a.name] = a.default_value;
  return out;
}

ActionMap LinearModel::infer(const FeatureVector& fv) {
  ActionMap out;
  for (const ActionSpec& a : spec_.actions) {
    const LinearPolicy& p = spec_.linear.at(a.name);
    double acc = 0.0;
    for (std::size_t i = 0; i < p.weights.size() && i < fv.values.size(); ++i) acc += p.weights[i] * fv.values[i];
    acc += p.bias;
    out[a.name] = std::clamp(acc, a.min, a.max);
  }
  return out;
}

SidecarModel::SidecarModel(const ModelSpec& spec) : spec_(spec) {
  const std::string& url = spec.endpoint;
  const auto scheme = url.find("://");
  const auto path_at = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  base_ = url.substr(0, path_at);
  if (path_at != std::string::npos) prefix_ = url.substr(path_at);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
}

json SidecarModel::request_body(const FeatureVector& fv) const {
  json features = json::object();
  for (std::size_t i = 0; i < spec_.features.size() && i < fv.values.size(); ++i) features[spec_.features[i]] = fv.values[i];
  return {{"env", fv.environment_id}, {"window_start", to_unix_seconds(fv.window_start)}, {"features", std::move(features)}};
}

ActionMap SidecarModel::parse_response(int status, const std::string& body) const {
  if (status != 200) throw bad_response("status " + std::to_string(status));
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw bad_response(std::string("malformed body: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("action") || !doc["action"].is_object()) {
    throw bad_response("body must be an object with an 'action' object");
  }
  const json& action = doc["action"];
  ActionMap out;
  for (const auto& [name, value] : action.items()) {
    const bool known = std::any_of(spec_.actions.begin(), spec_.actions.end(),
                                   [&](const ActionSpec& a) { return a.name == name; });
    if (!known) throw bad_response("unexpected action '" + name + "'");
    if (!value.is_number()) throw bad_response("action '" + name + "' is " + value.type_name() + ", not a number");
    out[name] = value.get<double>();
  }
  for (const ActionSpec& a : spec_.actions) {
    if (!out.count(a.name)) throw bad_response("missing action '" + a.name + "'");
  }
  return out;
}

ActionMap SidecarModel::infer(const FeatureVector& fv) {
  httplib::Client client(base_);
  const auto timeout = std::chrono::milliseconds(spec_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(prefix_ + "/act", request_body(fv).dump(), "application/json");
  if (!res) {
    const auto elapsed = std::chrono::steady_clock::now() - started;
    const httplib::Error err = res.error();
    if (err == httplib::Error::ConnectionTimeout || (err == httplib::Error::Read && elapsed >= timeout)) {
      throw ModelError("ModelTimeout", "no response within " + std::to_string(spec_.timeout_ms) + " ms");
    }
    throw ModelError("ModelUnreachable", httplib::to_string(err));
  }
  return parse_response(res->status, res->body);
}

bool SidecarModel::healthy() {
  httplib::Client client(base_);
  client.set_connection_timeout(std::chrono::milliseconds(spec_.timeout_ms));
  client.set_read_timeout(std::chrono::milliseconds(spec_.timeout_ms));
  auto res = client.Get(prefix_ + "/health");
  if (!res || res->status != 200) return false;
  try {
    const json doc = json::parse(res->body);
    return doc.value("status", "") == "ok";
  } catch (const json::exception&) {
    return false;
  }
}

std::unique_ptr<ModelClient> make_model(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::stub_constant: return std::make_unique<ConstantModel>(spec);
    case ModelKind::stub_linear: return std::make_unique<LinearModel>(spec);
    case ModelKind::sidecar_http: return std::make_unique<SidecarModel>(spec);
  }
  return nullptr;
}

Decision decide(const std::optional<ActionMap>& raw, const ModelSpec& spec) {
  Decision d;
  d.valid = true;
  if (!raw) {
    d.valid = false;
    d.fallback_used = true;
    for (const ActionSpec& a : spec.actions) d.action[a.name] = a.default_value;
    return d;
  }
  d.raw_action = *raw;
  for (const ActionSpec& a : spec.actions) {
    const auto it = raw->find(a.name);
    if (it == raw->end() || !std::isfinite(it->second)) {
      d.action[a.name] = a.default_value;
      d.valid = false;
      continue;
    }
    const double x = it->second;
    if (x >= a.min && x <= a.max) {
      d.action[a.name] = x;
      continue;
    }
    d.valid = false;
    d.action[a.name] = a.on_invalid == OnInvalid::clamp ? std::clamp(x, a.min, a.max) : a.default_value;
  }
  return d;
}

json decision_to_json(const Decision& d) {
  // Non-finite raw values serialize as null.
  return {{"env", d.environment_id},
          {"window_start", to_unix_seconds(d.window_start)},
          {"raw_action", d.raw_action},
          {"action", d.action},
          {"valid", d.valid},
          {"fallback_used", d.fallback_used}};
}

}  // namespace edgeflow
