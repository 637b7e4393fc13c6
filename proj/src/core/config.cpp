#include "edgeflow/core/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "edgeflow/core/errors.hpp"
#include "edgeflow/expr/expr.hpp"
#include "core/json_reader.hpp"

namespace edgeflow {

using nlohmann::json;

namespace {

using internal::ObjectReader;
using internal::line_of;
using internal::type_name;
using internal::index_path;
using internal::parse_enum;
using internal::require;

Normalization parse_normalization(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  Normalization n;
  static constexpr std::pair<const char*, Normalization::Kind> kinds[] = {
      {"none", Normalization::Kind::none},
      {"minmax", Normalization::Kind::minmax},
      {"zscore", Normalization::Kind::zscore}};
  n.kind = parse_enum(r.string("kind"), r.child("kind"), kinds);
  switch (n.kind) {
    case Normalization::Kind::none:
      break;
    case Normalization::Kind::minmax:
      n.min = r.number("min");
      n.max = r.number("max");
      require(n.min < n.max, r.child("max"), "minmax requires min < max");
      break;
    case Normalization::Kind::zscore:
      n.mean = r.number("mean");
      n.std = r.number("std");
      require(n.std > 0.0, r.child("std"), "zscore std must be > 0");
      break;
  }
  r.finish();
  return n;
}

SignalSpec parse_signal(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  SignalSpec s;
  s.signal_id = r.string("signal_id");
  require(!s.signal_id.empty(), r.child("signal_id"), "must be non-empty");
  s.unit = r.string("unit");
  s.expected_period_s = r.number("expected_period_s");
  require(s.expected_period_s > 0.0, r.child("expected_period_s"), "must be > 0");

  static constexpr std::pair<const char*, Aggregation> aggregations[] = {
      {"last", Aggregation::last}, {"mean", Aggregation::mean}, {"sum", Aggregation::sum},
      {"min", Aggregation::min},   {"max", Aggregation::max}};
  s.aggregation = parse_enum(r.string_or("aggregation", "last"), r.child("aggregation"), aggregations);

  static constexpr std::pair<const char*, GapFill> fills[] = {{"locf", GapFill::locf},
                                                              {"linear", GapFill::linear},
                                                              {"historical_mean", GapFill::historical_mean},
                                                              {"fail", GapFill::fail}};
  s.gap_fill = parse_enum(r.string_or("gap_fill", "locf"), r.child("gap_fill"), fills);

  if (const json* st = r.optional("max_staleness_s")) {
    s.max_staleness_s = ObjectReader::as_number(*st, r.child("max_staleness_s"));
    require(*s.max_staleness_s > 0.0, r.child("max_staleness_s"), "must be > 0");
  }
  if (const json* b = r.optional("bounds")) {
    ObjectReader br(*b, r.child("bounds"));
    Bounds bounds{br.number("min"), br.number("max")};
    require(bounds.min < bounds.max, br.child("max"), "bounds require min < max");
    br.finish();
    s.bounds = bounds;
  }
  if (const json* a = r.optional("anomaly")) {
    ObjectReader ar(*a, r.child("anomaly"));
    AnomalyParams p;
    p.buffer_len = static_cast<int>(ar.integer("buffer_len"));
    require(p.buffer_len >= 5, ar.child("buffer_len"), "must be >= 5");
    p.z_threshold = ar.number("z_threshold");
    require(p.z_threshold > 0.0, ar.child("z_threshold"), "must be > 0");
    ar.finish();
    s.anomaly = p;
  }
  if (const json* n = r.optional("normalization")) s.normalization = parse_normalization(*n, r.child("normalization"));
  r.finish();
  return s;
}

DerivedSignalSpec parse_derived(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  DerivedSignalSpec d;
  d.signal_id = r.string("signal_id");
  require(!d.signal_id.empty(), r.child("signal_id"), "must be non-empty");
  const json& members = r.array("members");
  require(!members.empty(), r.child("members"), "members must be non-empty");
  for (std::size_t i = 0; i < members.size(); ++i) {
    const std::string mp = index_path(r.child("members"), i);
    ObjectReader mr(members[i], mp);
    DerivedMember m{mr.string("signal_id"), mr.number("weight")};
    require(m.weight > 0.0, mr.child("weight"), "weight must be > 0");
    mr.finish();
    d.members.push_back(std::move(m));
  }
  r.finish();
  return d;
}

ModelSpec parse_model(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  ModelSpec m;
  static constexpr std::pair<const char*, ModelKind> kinds[] = {{"stub_constant", ModelKind::stub_constant},
                                                                {"stub_linear", ModelKind::stub_linear},
                                                                {"sidecar_http", ModelKind::sidecar_http}};
  m.kind = parse_enum(r.string("kind"), r.child("kind"), kinds);
  m.endpoint = r.string_or("endpoint", "");
  m.timeout_ms = static_cast<int>(r.integer_or("timeout_ms", 1000));
  require(m.timeout_ms > 0, r.child("timeout_ms"), "must be > 0");

  const json& features = r.array("features");
  for (std::size_t i = 0; i < features.size(); ++i) {
    m.features.push_back(ObjectReader::as_string(features[i], index_path(r.child("features"), i)));
  }
  require(!m.features.empty(), r.child("features"), "features must be non-empty");

  const json& actions = r.array("actions");
  require(!actions.empty(), r.child("actions"), "actions must be non-empty");
  static constexpr std::pair<const char*, OnInvalid> policies[] = {{"clamp", OnInvalid::clamp},
                                                                   {"substitute_default", OnInvalid::substitute_default}};
  for (std::size_t i = 0; i < actions.size(); ++i) {
    ObjectReader ar(actions[i], index_path(r.child("actions"), i));
    ActionSpec a;
    a.name = ar.string("name");
    a.min = ar.number("min");
    a.max = ar.number("max");
    a.default_value = ar.number("default");
    a.on_invalid = parse_enum(ar.string_or("on_invalid", "clamp"), ar.child("on_invalid"), policies);
    ar.finish();
    m.actions.push_back(std::move(a));
  }

  if (const json* lin = r.optional("linear")) {
    const std::string lp = r.child("linear");
    if (!lin->is_object()) throw SchemaError(lp, std::string("expected object, got ") + type_name(*lin));
    for (const auto& [name, policy] : lin->items()) {
      ObjectReader pr(policy, lp + "." + name);
      LinearPolicy p;
      const json& w = pr.array("weights");
      for (std::size_t i = 0; i < w.size(); ++i) {
        p.weights.push_back(ObjectReader::as_number(w[i], index_path(pr.child("weights"), i)));
      }
      p.bias = pr.number_or("bias", 0.0);
      pr.finish();
      m.linear.emplace(name, std::move(p));
    }
  }
  r.finish();
  return m;
}

ForwarderSpec parse_forwarder(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  ForwarderSpec f;
  f.id = r.string("id");
  static constexpr std::pair<const char*, ForwarderKind> kinds[] = {{"log", ForwarderKind::log},
                                                                    {"http_post", ForwarderKind::http_post},
                                                                    {"mqtt_publish", ForwarderKind::mqtt_publish}};
  f.kind = parse_enum(r.string("kind"), r.child("kind"), kinds);
  f.target = r.string("target");
  f.action_field = r.string("action_field");
  r.finish();
  return f;
}

StoreSpec parse_store(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  StoreSpec s;
  s.path = r.string_or("path", s.path);
  s.anonymize = r.boolean_or("anonymize", false);
  s.salt = r.string_or("salt", "");
  r.finish();
  return s;
}

EnvironmentConfig parse_environment(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  EnvironmentConfig e;
  e.environment_id = r.string("environment_id");
  require(!e.environment_id.empty(), r.child("environment_id"), "must be non-empty");
  e.window_seconds = r.integer_or("window_seconds", 900);
  require(e.window_seconds > 0, r.child("window_seconds"), "must be > 0");
  e.grace_seconds = r.number_or("grace_seconds", 0.0);
  require(e.grace_seconds >= 0.0, r.child("grace_seconds"), "must be >= 0");
  e.epoch_origin = from_unix_seconds(r.integer_or("epoch_origin", 0));
  e.day_seconds = r.integer_or("day_seconds", 86400);
  require(e.day_seconds > 0, r.child("day_seconds"), "must be > 0");
  e.history_days = static_cast<int>(r.integer_or("history_days", 7));
  require(e.history_days > 0, r.child("history_days"), "must be > 0");
  const std::int64_t capacity = r.integer_or("queue_capacity", 4096);
  require(capacity > 0, r.child("queue_capacity"), "must be > 0");
  e.queue_capacity = static_cast<std::size_t>(capacity);

  const json& signals = r.array("signals");
  for (std::size_t i = 0; i < signals.size(); ++i) {
    e.signals.push_back(parse_signal(signals[i], index_path(r.child("signals"), i)));
  }
  if (const json* derived = r.array_opt("derived")) {
    for (std::size_t i = 0; i < derived->size(); ++i) {
      e.derived.push_back(parse_derived((*derived)[i], index_path(r.child("derived"), i)));
    }
  }
  e.model = parse_model(r.required("model"), r.child("model"));
  e.reward_expr = r.string_or("reward_expr", "0");
  if (const json* fw = r.array_opt("forwarders")) {
    for (std::size_t i = 0; i < fw->size(); ++i) {
      e.forwarders.push_back(parse_forwarder((*fw)[i], index_path(r.child("forwarders"), i)));
    }
  }
  if (const json* store = r.optional("store")) e.store = parse_store(*store, r.child("store"));
  r.finish();
  return e;
}

TranslatorSpec parse_translator(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  TranslatorSpec t;
  t.payload_format = r.string_or("payload_format", "json");
  require(t.payload_format == "json", r.child("payload_format"), "only 'json' is supported");
  t.value_path = r.string("value_path");
  require(!t.value_path.empty() && t.value_path.front() == '/', r.child("value_path"), "must start with '/'");
  if (const json* ts = r.optional("timestamp_path")) {
    t.timestamp_path = ObjectReader::as_string(*ts, r.child("timestamp_path"));
    require(!t.timestamp_path->empty() && t.timestamp_path->front() == '/', r.child("timestamp_path"),
            "must start with '/'");
  }
  static constexpr std::pair<const char*, TimestampUnit> units[] = {{"s", TimestampUnit::s}, {"ms", TimestampUnit::ms}};
  t.timestamp_unit = parse_enum(r.string_or("timestamp_unit", "s"), r.child("timestamp_unit"), units);
  t.scale = r.number_or("scale", 1.0);
  require(t.scale != 0.0, r.child("scale"), "scale must be non-zero");
  t.offset = r.number_or("offset", 0.0);
  t.signal_id = r.string("signal_id");
  t.unit = r.string("unit");
  r.finish();
  return t;
}

SourceSpec parse_source(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  SourceSpec s;
  s.source_id = r.string("source_id");
  require(!s.source_id.empty(), r.child("source_id"), "must be non-empty");
  static constexpr std::pair<const char*, SourceKind> kinds[] = {
      {"sim", SourceKind::sim}, {"http", SourceKind::http}, {"mqtt", SourceKind::mqtt}};
  s.kind = parse_enum(r.string("kind"), r.child("kind"), kinds);
  if (const json* conn = r.optional("connection")) {
    ObjectReader cr(*conn, r.child("connection"));
    if (s.kind == SourceKind::mqtt) {
      s.mqtt.host = cr.string_or("host", s.mqtt.host);
      s.mqtt.port = static_cast<int>(cr.integer_or("port", s.mqtt.port));
      require(s.mqtt.port > 0 && s.mqtt.port < 65536, cr.child("port"), "must be a TCP port");
      s.mqtt.topic = cr.string("topic");
      s.mqtt.client_id = cr.string_or("client_id", "edgeflow-" + s.source_id);
    }
    cr.finish();
  } else if (s.kind == SourceKind::mqtt) {
    throw SchemaError(r.child("connection"), "missing required field");
  }
  s.translator = parse_translator(r.required("translator"), r.child("translator"));
  const json& envs = r.array("environments");
  require(!envs.empty(), r.child("environments"), "environments must be non-empty");
  for (std::size_t i = 0; i < envs.size(); ++i) {
    s.environments.push_back(ObjectReader::as_string(envs[i], index_path(r.child("environments"), i)));
  }
  r.finish();
  return s;
}

}  // namespace

Config load_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // `byte` is one past the offending character.
    throw ParseError(line_of(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
  }

  ObjectReader r(doc, "");
  Config config;
  const json& envs = r.array("environments");
  require(!envs.empty(), "environments", "environments must be non-empty");
  for (std::size_t i = 0; i < envs.size(); ++i) {
    config.environments.push_back(parse_environment(envs[i], index_path("environments", i)));
  }
  if (const json* sources = r.array_opt("sources")) {
    for (std::size_t i = 0; i < sources->size(); ++i) {
      config.sources.push_back(parse_source((*sources)[i], index_path("sources", i)));
    }
  }
  r.finish();
  return config;
}

Config load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_config(buf.str());
}

namespace {

void validate_environment(const EnvironmentConfig& env, const std::string& p, std::vector<Violation>& out) {
  auto add = [&out](std::string path, std::string message) { out.push_back({std::move(path), std::move(message)}); };

  std::set<std::string> ids;
  for (std::size_t i = 0; i < env.signals.size(); ++i) {
    if (!ids.insert(env.signals[i].signal_id).second) {
      add(p + ".signals[" + std::to_string(i) + "].signal_id", "duplicate signal id '" + env.signals[i].signal_id + "'");
    }
  }
  for (std::size_t i = 0; i < env.derived.size(); ++i) {
    const auto& d = env.derived[i];
    const std::string dp = p + ".derived[" + std::to_string(i) + "]";
    if (!ids.insert(d.signal_id).second) add(dp + ".signal_id", "duplicate signal id '" + d.signal_id + "'");
    for (std::size_t k = 0; k < d.members.size(); ++k) {
      if (!env.find_signal(d.members[k].signal_id)) {
        add(dp + ".members[" + std::to_string(k) + "].signal_id",
            "member '" + d.members[k].signal_id + "' is not a configured signal");
      }
    }
  }

  const ModelSpec& m = env.model;
  const std::string mp = p + ".model";
  for (std::size_t i = 0; i < m.features.size(); ++i) {
    if (!ids.count(m.features[i])) {
      add(mp + ".features[" + std::to_string(i) + "]", "feature '" + m.features[i] + "' names no configured signal");
    }
  }
  std::set<std::string> action_names;
  for (std::size_t i = 0; i < m.actions.size(); ++i) {
    const ActionSpec& a = m.actions[i];
    const std::string ap = mp + ".actions[" + std::to_string(i) + "]";
    if (!action_names.insert(a.name).second) add(ap + ".name", "duplicate action '" + a.name + "'");
    if (!(a.min <= a.default_value && a.default_value <= a.max)) add(ap, "requires min <= default <= max");
  }
  if (m.kind == ModelKind::sidecar_http && m.endpoint.empty()) add(mp + ".endpoint", "sidecar_http requires an endpoint");
  if (m.kind == ModelKind::stub_linear) {
    for (const ActionSpec& a : m.actions) {
      const auto it = m.linear.find(a.name);
      if (it == m.linear.end()) {
        add(mp + ".linear", "no linear policy for action '" + a.name + "'");
      } else if (it->second.weights.size() != m.features.size()) {
        add(mp + ".linear." + a.name + ".weights", "expected one weight per feature");
      }
    }
  }
  for (const auto& [name, policy] : m.linear) {
    if (!action_names.count(name)) add(mp + ".linear." + name, "linear policy names no configured action");
  }

  try {
    const expr::Expr reward = expr::parse(env.reward_expr);
    for (const std::string& var : expr::free_vars(reward)) {
      const auto dot = var.find('.');
      const std::string ns = dot == std::string::npos ? "" : var.substr(0, dot);
      const std::string rest = dot == std::string::npos ? var : var.substr(dot + 1);
      const bool resolvable = ((ns == "cur" || ns == "next") && ids.count(rest)) || (ns == "action" && action_names.count(rest));
      if (!resolvable) add(p + ".reward_expr", "unresolvable variable '" + var + "'");
    }
  } catch (const expr::SyntaxError& e) {
    add(p + ".reward_expr", std::string("syntax error: ") + e.what());
  }

  std::set<std::string> forwarder_ids;
  for (std::size_t i = 0; i < env.forwarders.size(); ++i) {
    const ForwarderSpec& f = env.forwarders[i];
    const std::string fp = p + ".forwarders[" + std::to_string(i) + "]";
    if (!forwarder_ids.insert(f.id).second) add(fp + ".id", "duplicate forwarder id '" + f.id + "'");
    if (!action_names.count(f.action_field)) add(fp + ".action_field", "names no configured action");
    if (f.target.empty()) add(fp + ".target", "must be non-empty");
  }
  if (env.store.path.empty()) add(p + ".store.path", "must be non-empty");
}

}  // namespace

std::vector<Violation> validate_config(const Config& config) {
  std::vector<Violation> out;
  std::set<std::string> env_ids;
  for (std::size_t i = 0; i < config.environments.size(); ++i) {
    const std::string p = "environments[" + std::to_string(i) + "]";
    const EnvironmentConfig& env = config.environments[i];
    if (!env_ids.insert(env.environment_id).second) {
      out.push_back({p + ".environment_id", "duplicate environment id '" + env.environment_id + "'"});
    }
    validate_environment(env, p, out);
  }

  std::set<std::string> source_ids;
  for (std::size_t i = 0; i < config.sources.size(); ++i) {
    const SourceSpec& s = config.sources[i];
    const std::string p = "sources[" + std::to_string(i) + "]";
    if (!source_ids.insert(s.source_id).second) out.push_back({p + ".source_id", "duplicate source id '" + s.source_id + "'"});
    for (std::size_t k = 0; k < s.environments.size(); ++k) {
      const std::string ep = p + ".environments[" + std::to_string(k) + "]";
      const EnvironmentConfig* env = config.find_environment(s.environments[k]);
      if (!env) {
        out.push_back({ep, "unknown environment '" + s.environments[k] + "'"});
        continue;
      }
      const SignalSpec* sig = env->find_signal(s.translator.signal_id);
      if (!sig) {
        out.push_back({p + ".translator.signal_id",
                       "signal '" + s.translator.signal_id + "' is not configured in environment '" + env->environment_id + "'"});
      } else if (!s.translator.unit.empty() && !sig->unit.empty() && s.translator.unit != sig->unit) {
        out.push_back({p + ".translator.unit", "unit '" + s.translator.unit + "' differs from signal unit '" + sig->unit +
                                                   "' in environment '" + env->environment_id + "'"});
      }
    }
  }
  return out;
}

}  // namespace edgeflow
