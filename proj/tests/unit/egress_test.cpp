#include <gtest/gtest.h>

#include <httplib.h>

#include <set>
#include <thread>

#include "edgeflow/egress/egress.hpp"
#include "support/fake_broker.hpp"
#include "support/temp_dir.hpp"

using namespace edgeflow;
using nlohmann::json;
using testing_support::read_lines;
using testing_support::TempDir;

namespace {

Transition sample_transition(const std::string& env = "home-17") {
  Transition t;
  t.environment_id = env;
  t.window_start = from_unix_seconds(1700000100);
  t.observation = {{"load", {8.5, Quality::measured}}, {"price", {0.25, Quality::carried}}};
  t.encoded = {0.425, 0.0};
  t.raw_action = {{"power", 1.5}};
  t.action = {{"power", 1.0}};
  t.valid = false;
  t.reward = -0.25;
  return t;
}

Decision decision(std::int64_t start, double power) {
  Decision d;
  d.environment_id = "home";
  d.window_start = from_unix_seconds(start);
  d.action = {{"power", power}, {"light", 1.0}};
  d.valid = true;
  return d;
}

ForwarderSpec spec(const std::string& id, ForwarderKind kind, const std::string& target, const std::string& field) {
  return {id, kind, target, field};
}

}  // namespace

TEST(Anonymize, StableForFixedSaltAndDistinctAcrossIds) {
  EXPECT_EQ(anonymize_id("home-17", "s"), anonymize_id("home-17", "s"));
  EXPECT_NE(anonymize_id("home-17", "s"), anonymize_id("home-17", "t"));
  const std::string h = anonymize_id("home-17", "s");
  EXPECT_EQ(h.size(), 16u);
  EXPECT_EQ(h.find_first_not_of("0123456789abcdef"), std::string::npos);
  std::set<std::string> seen;
  for (int i = 0; i < 2000; ++i) seen.insert(anonymize_id("env-" + std::to_string(i), "salt"));
  EXPECT_EQ(seen.size(), 2000u);
}

TEST(Anonymize, KnownDigestPrefix) {
  // First 8 bytes of SHA-256("salt\0env") from sha256sum.
  EXPECT_EQ(anonymize_id("env", "salt"), "cd2a586d7c2aad11");
}

TEST(Anonymize, OnlyEnvironmentChanges) {
  const Transition t = sample_transition();
  Transition a = anonymize(t, "s");
  EXPECT_NE(a.environment_id, t.environment_id);
  a.environment_id = t.environment_id;
  EXPECT_EQ(transition_to_json(a), transition_to_json(t));
}

TEST(TransitionJson, ExactSchemaWithSortedKeys) {
  EXPECT_EQ(transition_to_json(sample_transition()).dump(),
            R"({"action":{"power":1.0},"degraded":false,"enc":[0.425,0.0],"env":"home-17","fallback_used":false,)"
            R"("obs":{"load":8.5,"price":0.25},"qual":{"load":"measured","price":"carried"},"raw_action":{"power":1.5},)"
            R"("reward":-0.25,"valid":false,"window_start":1700000100})");
  Transition t = sample_transition();
  t.reward.reset();
  EXPECT_TRUE(transition_to_json(t)["reward"].is_null());
}

TEST(TransitionStore, AppendsWholeLinesFromConcurrentWriters) {
  TempDir dir;
  Metrics metrics;
  TransitionStore store(dir.file("t.jsonl"), metrics);
  std::vector<std::thread> writers;
  for (int w = 0; w < 4; ++w) {
    writers.emplace_back([&store, w] {
      for (int i = 0; i < 250; ++i) store.append(sample_transition("env-" + std::to_string(w)), StoreSpec{});
    });
  }
  for (auto& t : writers) t.join();
  const auto lines = read_lines(dir.file("t.jsonl"));
  ASSERT_EQ(lines.size(), 1000u);
  for (const std::string& l : lines) ASSERT_EQ(json::parse(l).size(), 11u);
  EXPECT_EQ(metrics.transitions_written.load(), 1000u);
}

TEST(TransitionStore, AnonymizedFileLeaksNoIdentifier) {
  TempDir dir;
  Metrics metrics;
  TransitionStore store(dir.file("t.jsonl"), metrics);
  store.append(sample_transition("home-17"), {"t.jsonl", true, "pepper"});
  const std::string text = testing_support::read_file(dir.file("t.jsonl"));
  EXPECT_EQ(text.find("home-17"), std::string::npos);
  EXPECT_NE(text.find(anonymize_id("home-17", "pepper")), std::string::npos);
}

TEST(TransitionStore, UnwritablePathCountsStoreError) {
  Metrics metrics;
  TransitionStore store("/nonexistent-dir/x/t.jsonl", metrics);
  EXPECT_FALSE(store.append(sample_transition(), StoreSpec{}));
  EXPECT_EQ(metrics.store_errors.load(), 1u);
}

TEST(Forwarding, LogForwarderWritesOneLinePerDecisionForItsFieldOnly) {
  TempDir dir;
  Metrics metrics;
  {
    ForwardingHub hub({spec("charger", ForwarderKind::log, "fwd.jsonl", "power"),
                       spec("lamp", ForwarderKind::log, "lamp.jsonl", "switch")},
                      dir.path().string(), metrics);
    hub.forward(decision(0, 0.5));
    hub.forward(decision(900, 0.7));
    hub.drain();
  }
  const auto lines = read_lines(dir.file("fwd.jsonl"));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], R"({"env":"home","field":"power","forwarder":"charger","value":0.5,"window_start":0})");
  EXPECT_TRUE(read_lines(dir.file("lamp.jsonl")).empty());
}

TEST(Forwarding, HttpPostDeliversPayload) {
  httplib::Server server;
  std::vector<std::string> bodies;
  std::mutex mu;
  server.Post("/cmd", [&](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mu);
    bodies.push_back(req.body);
    res.status = 204;
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  Metrics metrics;
  {
    ForwardingHub hub({spec("light", ForwarderKind::http_post, "http://127.0.0.1:" + std::to_string(port) + "/cmd", "light")},
                      "", metrics);
    hub.forward(decision(1800, 0.1));
    hub.drain();
  }
  server.stop();
  t.join();
  ASSERT_EQ(bodies.size(), 1u);
  EXPECT_EQ(json::parse(bodies[0]), json({{"light", 1.0}, {"window_start", 1800}}));
  EXPECT_EQ(metrics.forward_failures.load(), 0u);
}

TEST(Forwarding, DeadTargetRetriesOnceThenCountsFailure) {
  httplib::Server server;
  std::atomic<int> attempts{0};
  server.Post("/cmd", [&](const httplib::Request&, httplib::Response& res) {
    ++attempts;
    res.status = 503;
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  Metrics metrics;
  const auto started = std::chrono::steady_clock::now();
  {
    ForwardingHub hub({spec("x", ForwarderKind::http_post, "http://127.0.0.1:" + std::to_string(port) + "/cmd", "power")}, "",
                      metrics);
    hub.forward(decision(0, 0.5));
    hub.drain();
  }
  const auto elapsed = std::chrono::steady_clock::now() - started;
  server.stop();
  t.join();
  EXPECT_EQ(attempts.load(), 2);
  EXPECT_EQ(metrics.forward_failures.load(), 1u);
  EXPECT_GE(elapsed, std::chrono::milliseconds(250));
}

TEST(Forwarding, RefusedConnectionDoesNotBlockCaller) {
  Metrics metrics;
  ForwardingHub hub({spec("x", ForwarderKind::http_post, "http://127.0.0.1:1/cmd", "power")}, "", metrics,
                    std::chrono::milliseconds(250));
  const auto started = std::chrono::steady_clock::now();
  for (int i = 0; i < 3; ++i) hub.forward(decision(900 * i, 0.5));
  EXPECT_LT(std::chrono::steady_clock::now() - started, std::chrono::milliseconds(100));
  hub.drain();
  EXPECT_EQ(metrics.forward_failures.load(), 3u);
}

TEST(Forwarding, MqttPublishAtQos1) {
  testing_support::FakeBroker broker;
  Metrics metrics;
  {
    ForwardingHub hub({spec("m", ForwarderKind::mqtt_publish, "mqtt://127.0.0.1:" + std::to_string(broker.port()) + "/home/power",
                            "power")},
                      "", metrics);
    hub.forward(decision(900, 0.75));
    hub.drain();
  }
  ASSERT_TRUE(broker.wait_for_messages(1));
  const auto msgs = broker.received();
  EXPECT_EQ(msgs[0].topic, "home/power");
  EXPECT_EQ(msgs[0].qos, 1);
  EXPECT_EQ(json::parse(msgs[0].payload), json({{"power", 0.75}, {"window_start", 900}}));
  EXPECT_EQ(metrics.forward_failures.load(), 0u);
}

TEST(Metrics, StartsAtZeroAndSerializesAllCounters) {
  Metrics m;
  const MetricsSnapshot s = m.snapshot();
  const json j = s.to_json();
  for (const char* key : {"events_received", "translate_errors", "enqueued", "dropped_full", "late_events", "gaps_filled",
                          "anomalies_corrected", "frames_emitted", "frames_degraded", "decisions_emitted", "fallbacks_used",
                          "transitions_written", "forward_failures", "sources"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  for (const auto& [k, v] : j.items()) {
    if (v.is_number()) {
      EXPECT_EQ(v, 0) << k;
    }
  }
  m.gap_filled(GapFill::linear);
  m.gap_filled(GapFill::linear);
  EXPECT_EQ(m.snapshot().gaps_filled.at("linear"), 2u);
  EXPECT_EQ(m.snapshot().gaps_filled_total(), 2u);
}
