#include <gtest/gtest.h>

#include <httplib.h>

#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "edgeflow/inference/inference.hpp"
#include "support/temp_dir.hpp"

using namespace edgeflow;
using nlohmann::json;
using testing_support::fixture;
using testing_support::read_file;

namespace {

Normalization minmax(double lo, double hi) { return {Normalization::Kind::minmax, lo, hi, 0, 1}; }

ModelSpec power_model(ModelKind kind = ModelKind::stub_constant) {
  ModelSpec m;
  m.kind = kind;
  m.features = {"load", "price"};
  m.actions = {{"power", 0.0, 1.0, 0.0, OnInvalid::clamp}};
  m.linear["power"] = {{1.0, 0.0}, 0.0};
  return m;
}

WindowFrame frame(std::int64_t start, std::map<std::string, double> values, bool degraded = false) {
  WindowFrame f;
  f.environment_id = "home";
  f.window = {from_unix_seconds(start), from_unix_seconds(start + 900)};
  for (auto& [k, v] : values) f.values[k] = {v, Quality::measured};
  f.degraded = degraded;
  return f;
}

EnvironmentConfig env_with(ModelSpec model, std::string reward) {
  EnvironmentConfig e;
  e.environment_id = "home";
  for (const std::string& id : model.features) {
    SignalSpec s;
    s.signal_id = id;
    e.signals.push_back(s);
  }
  e.model = std::move(model);
  e.reward_expr = std::move(reward);
  return e;
}

class ScriptedModel final : public ModelClient {
 public:
  explicit ScriptedModel(std::vector<std::optional<ActionMap>> script) : script_(std::move(script)) {}
  ActionMap infer(const FeatureVector&) override {
    const auto& next = script_.at(i_++ % script_.size());
    if (!next) throw ModelError("ModelUnreachable", "scripted failure");
    return *next;
  }

 private:
  std::vector<std::optional<ActionMap>> script_;
  std::size_t i_ = 0;
};

// Test double for the out-of-process model.
class FakeSidecar {
 public:
  explicit FakeSidecar(std::function<void(const httplib::Request&, httplib::Response&)> act) {
    server_.Post("/act", std::move(act));
    server_.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok"})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeSidecar() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST(Encode, NormalizationExamples) {
  EXPECT_EQ(normalize(50, minmax(0, 100)), 0.5);
  EXPECT_EQ(normalize(120, minmax(0, 100)), 1.0);
  EXPECT_EQ(normalize(-5, minmax(0, 100)), 0.0);
  EXPECT_EQ(normalize(14, {Normalization::Kind::zscore, 0, 1, 10, 2}), 2.0);
  EXPECT_EQ(normalize(3.5, {}), 3.5);
}

TEST(Encode, DecodeInvertsInRangeMinmax) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const double lo = -100 * u(rng);
    const double hi = lo + 1 + 200 * u(rng);
    const double x = lo + (hi - lo) * u(rng);
    EXPECT_NEAR(decode_norm(normalize(x, minmax(lo, hi)), minmax(lo, hi)), x, 1e-9);
  }
}

TEST(Encode, FeatureOrderAndErrors) {
  EnvironmentConfig e = env_with(power_model(), "0");
  e.signals[0].normalization = minmax(0, 10);
  const FeatureVector fv = encode(frame(0, {{"load", 5}, {"price", 0.3}}), e);
  EXPECT_EQ(fv.values, (std::vector<double>{0.5, 0.3}));
  EXPECT_EQ(fv.environment_id, "home");
  try {
    encode(frame(0, {{"load", 5}}), e);
    FAIL();
  } catch (const EncodeError& err) {
    EXPECT_EQ(err.kind(), "MissingFeature");
  }
  e.signals[1].normalization = {Normalization::Kind::zscore, 0, 1, 0, 0};
  try {
    encode(frame(0, {{"load", 5}, {"price", 0.0}}), e);
    FAIL();
  } catch (const EncodeError& err) {
    EXPECT_EQ(err.kind(), "NonFiniteEncoding");
  }
}

TEST(Models, ConstantAndLinearStubs) {
  const ModelSpec m = power_model();
  EXPECT_EQ(ConstantModel(m).infer({}), (ActionMap{{"power", 0.0}}));
  EXPECT_EQ(LinearModel(m).infer({"e", {}, {0.5, 0.9}}), (ActionMap{{"power", 0.5}}));
  EXPECT_EQ(LinearModel(m).infer({"e", {}, {3.0, 0.9}}), (ActionMap{{"power", 1.0}}));
}

TEST(Decide, Examples) {
  const ModelSpec m = power_model();
  Decision ok = decide(ActionMap{{"power", 0.5}}, m);
  EXPECT_EQ(ok.action, (ActionMap{{"power", 0.5}}));
  EXPECT_TRUE(ok.valid);
  EXPECT_FALSE(ok.fallback_used);

  Decision clamped = decide(ActionMap{{"power", 1.5}}, m);
  EXPECT_EQ(clamped.action, (ActionMap{{"power", 1.0}}));
  EXPECT_FALSE(clamped.valid);
  EXPECT_EQ(clamped.raw_action.at("power"), 1.5);

  Decision timeout = decide(std::nullopt, m);
  EXPECT_EQ(timeout.action, (ActionMap{{"power", 0.0}}));
  EXPECT_FALSE(timeout.valid);
  EXPECT_TRUE(timeout.fallback_used);
}

TEST(Decide, SubstituteDefaultNonFiniteAndMissing) {
  ModelSpec m = power_model();
  m.actions[0].default_value = 0.25;
  m.actions[0].on_invalid = OnInvalid::substitute_default;
  EXPECT_EQ(decide(ActionMap{{"power", -3}}, m).action.at("power"), 0.25);
  const Decision nan = decide(ActionMap{{"power", std::nan("")}}, m);
  EXPECT_EQ(nan.action.at("power"), 0.25);
  EXPECT_FALSE(nan.valid);
  EXPECT_FALSE(nan.fallback_used);
  EXPECT_EQ(decide(ActionMap{}, m).action.at("power"), 0.25);
  m.actions[0].on_invalid = OnInvalid::clamp;
  EXPECT_EQ(decide(ActionMap{{"power", std::numeric_limits<double>::infinity()}}, m).action.at("power"), 0.25);
}

TEST(Sidecar, GoldenRequestAndResponses) {
  ModelSpec m = power_model(ModelKind::sidecar_http);
  m.endpoint = "http://127.0.0.1:9";
  const SidecarModel model(m);
  const FeatureVector fv{"home-17", from_unix_seconds(1700000100), {0.4, -0.5}};
  EXPECT_EQ(model.request_body(fv), json::parse(read_file(fixture("sidecar/act_request.json"))));
  EXPECT_EQ(model.request_body(fv).dump() + "\n", read_file(fixture("sidecar/act_request.json")));
  EXPECT_EQ(model.parse_response(200, read_file(fixture("sidecar/act_response.json"))), (ActionMap{{"power", 1.0}}));
  for (const char* bad : {"sidecar/act_response_type_error.json", "sidecar/act_response_extra_action.json",
                          "sidecar/act_response_missing_action.json"}) {
    try {
      model.parse_response(200, read_file(fixture(bad)));
      FAIL() << bad;
    } catch (const ModelError& e) {
      EXPECT_EQ(e.kind(), "ModelBadResponse") << bad;
    }
  }
  EXPECT_THROW(model.parse_response(500, read_file(fixture("sidecar/act_response.json"))), ModelError);
  EXPECT_THROW(model.parse_response(200, "{not json"), ModelError);
}

TEST(Sidecar, LiveCallHealthAndFailureModes) {
  FakeSidecar sidecar([](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    const double load = body["features"]["load"];
    res.set_content(json{{"action", {{"power", load > 0.5 ? 1.0 : 0.0}}}}.dump(), "application/json");
  });
  ModelSpec m = power_model(ModelKind::sidecar_http);
  m.endpoint = sidecar.endpoint();
  SidecarModel model(m);
  EXPECT_TRUE(model.healthy());
  EXPECT_EQ(model.infer({"e", from_unix_seconds(0), {0.7, 0.1}}), (ActionMap{{"power", 1.0}}));

  ModelSpec dead = m;
  dead.endpoint = "http://127.0.0.1:1";
  SidecarModel unreachable(dead);
  EXPECT_FALSE(unreachable.healthy());
  try {
    unreachable.infer({"e", {}, {0.1, 0.1}});
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_EQ(e.kind(), "ModelUnreachable");
  }
}

TEST(Sidecar, SlowResponseIsTimeout) {
  FakeSidecar sidecar([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"action":{"power":1.0}})", "application/json");
  });
  ModelSpec m = power_model(ModelKind::sidecar_http);
  m.endpoint = sidecar.endpoint();
  m.timeout_ms = 150;
  SidecarModel model(m);
  try {
    model.infer({"e", {}, {0.1, 0.1}});
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_EQ(e.kind(), "ModelTimeout");
  }
}

TEST(Reward, Examples) {
  const ActionMap act{{"power", 2.0}};
  EXPECT_DOUBLE_EQ(compute_reward("-(cur.price * action.power)", frame(0, {{"price", 0.2}}), act, frame(900, {{"price", 9}})), -0.4);
  EXPECT_EQ(compute_reward("0", frame(0, {}), act, frame(900, {})), 0.0);
  EXPECT_DOUBLE_EQ(compute_reward("next.soc - cur.soc", frame(0, {{"soc", 0.40}}), act, frame(900, {{"soc", 0.55}})), 0.15);
  EXPECT_THROW(compute_reward("cur.ghost", frame(0, {}), act, frame(900, {})), expr::UnboundVariable);
}

TEST(Predictor, TwoFramesYieldOneRewardedTransition) {
  const EnvironmentConfig e = env_with(power_model(), "0");
  Metrics metrics;
  Predictor p(e, make_model(e.model), metrics);
  auto r1 = p.step(frame(0, {{"load", 1}, {"price", 2}}));
  ASSERT_TRUE(r1.decision);
  EXPECT_TRUE(r1.transitions.empty());
  auto r2 = p.step(frame(900, {{"load", 1}, {"price", 2}}));
  ASSERT_EQ(r2.transitions.size(), 1u);
  EXPECT_EQ(r2.transitions[0].window_start, from_unix_seconds(0));
  EXPECT_EQ(r2.transitions[0].reward, 0.0);
  EXPECT_EQ(metrics.decisions_emitted.load(), 2u);
}

TEST(Predictor, SingleFrameThenShutdownFlushesNullReward) {
  const EnvironmentConfig e = env_with(power_model(), "0");
  Metrics metrics;
  Predictor p(e, make_model(e.model), metrics);
  p.step(frame(0, {{"load", 1}, {"price", 2}}));
  const auto t = p.flush();
  ASSERT_TRUE(t);
  EXPECT_FALSE(t->reward.has_value());
  EXPECT_FALSE(p.flush().has_value());
}

TEST(Predictor, DegradedFrameSkipsInferenceAndBreaksChain) {
  const EnvironmentConfig e = env_with(power_model(), "1");
  Metrics metrics;
  Predictor p(e, make_model(e.model), metrics);
  p.step(frame(0, {{"load", 1}, {"price", 2}}));
  auto r = p.step(frame(900, {{"load", 0}, {"price", 0}}, true));
  EXPECT_FALSE(r.decision);
  ASSERT_EQ(r.transitions.size(), 2u);
  EXPECT_FALSE(r.transitions[0].reward.has_value());
  EXPECT_FALSE(r.transitions[0].degraded);
  EXPECT_TRUE(r.transitions[1].degraded);
  EXPECT_TRUE(r.transitions[1].action.empty());
  EXPECT_FALSE(p.flush().has_value());
  EXPECT_EQ(metrics.decisions_emitted.load(), 1u);
}

TEST(Predictor, RewardErrorRecordsNullAndCounts) {
  const EnvironmentConfig e = env_with(power_model(), "cur.load / next.load");
  Metrics metrics;
  Predictor p(e, make_model(e.model), metrics);
  p.step(frame(0, {{"load", 1}, {"price", 2}}));
  auto r = p.step(frame(900, {{"load", 0}, {"price", 2}}));
  ASSERT_EQ(r.transitions.size(), 1u);
  EXPECT_FALSE(r.transitions[0].reward.has_value());
  EXPECT_EQ(metrics.reward_errors.load(), 1u);
}

TEST(Predictor, HostileModelNeverEscapesBounds) {
  const EnvironmentConfig e = env_with(power_model(), "0");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::optional<ActionMap>> script{ActionMap{{"power", std::nan("")}}, std::nullopt, ActionMap{{"power", -inf}},
                                               ActionMap{{"power", 1e300}},       std::nullopt, ActionMap{{"other", 1.0}},
                                               ActionMap{{"power", 0.3}}};
  Metrics metrics;
  Predictor p(e, std::make_unique<ScriptedModel>(script), metrics);
  int failures = 0;
  for (int i = 0; i < 70; ++i) {
    auto r = p.step(frame(900 * i, {{"load", 1}, {"price", 1}}));
    ASSERT_TRUE(r.decision);
    const double v = r.decision->action.at("power");
    EXPECT_TRUE(v >= 0.0 && v <= 1.0) << v;
    failures += !script[static_cast<std::size_t>(i) % script.size()].has_value();
  }
  EXPECT_EQ(metrics.fallbacks_used.load(), static_cast<std::uint64_t>(failures));
}
