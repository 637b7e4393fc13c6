#include <gtest/gtest.h>

#include <map>

#include "edgeflow/core/config.hpp"
#include "edgeflow/runtime/runner.hpp"
#include "edgeflow/sim/oracle.hpp"
#include "edgeflow/sim/scenario.hpp"
#include "edgeflow/sim/trace.hpp"
#include "support/temp_dir.hpp"

using namespace edgeflow;
using namespace edgeflow::sim;
using nlohmann::json;
using testing_support::TempDir;

namespace {

constexpr std::int64_t kStart = 1699999200;

Config reference() { return load_config_file(testing_support::fixture("reference_config.json")); }

Scenario multirate() { return load_scenario_file(testing_support::fixture("multirate_scenario.json")); }

std::string payload(double value, std::int64_t ts) { return json{{"value", value}, {"ts", ts}}.dump(); }

TraceEvent event(const std::string& source, std::int64_t ts, double value, std::int64_t arrival_offset = 0) {
  return {source, from_unix_seconds(ts + arrival_offset), payload(value, ts)};
}

}  // namespace

TEST(Scenario, ParsesAndValidates) {
  const Scenario s = multirate();
  EXPECT_EQ(s.duration_s, 14400);
  EXPECT_EQ(s.seed, 42u);
  ASSERT_EQ(s.sources.size(), 2u);
  EXPECT_EQ(s.sources[1].generator.kind, Generator::Kind::random_walk);
  EXPECT_NO_THROW(check_scenario(s, reference()));

  auto rejects = [](const std::string& text) {
    EXPECT_THROW(load_scenario(text), SchemaError) << text;
  };
  rejects(R"({"duration_s": 0, "sources": []})");
  rejects(R"({"duration_s": 10, "sources": [{"source_id": "a", "signal_id": "x", "period_s": 0, "generator": {"kind": "constant"}}]})");
  rejects(R"({"duration_s": 10, "sources": [{"source_id": "a", "signal_id": "x", "period_s": 1, "dropout_p": 1.5, "generator": {"kind": "constant"}}]})");
  rejects(R"({"duration_s": 10, "sources": [{"source_id": "a", "signal_id": "x", "period_s": 1, "jitter_s": 1, "generator": {"kind": "constant"}}]})");
  rejects(R"({"duration_s": 10, "sources": [{"source_id": "a", "signal_id": "x", "period_s": 1, "generator": {"kind": "chaos"}}]})");
  EXPECT_THROW(load_scenario("{\"duration_s\": "), ParseError);

  Scenario bad = s;
  bad.sources[0].source_id = "ghost";
  EXPECT_THROW(check_scenario(bad, reference()), Error);
  bad = s;
  bad.sources[0].signal_id = "price";
  EXPECT_THROW(check_scenario(bad, reference()), Error);
}

TEST(Trace, RoundTripsThroughFile) {
  const Config c = reference();
  Scenario s = multirate();
  s.sources[0].dropout_p = 0.3;
  s.sources[0].jitter_s = 20;
  const RawTrace t = generate_trace(s, c);
  EXPECT_FALSE(t.suppressed.empty());
  TempDir dir;
  write_trace(t, dir.file("trace.jsonl"));
  EXPECT_EQ(read_trace(dir.file("trace.jsonl")), t);
}

TEST(Trace, TruncatedLineReportsLineNumber) {
  TempDir dir;
  RawTrace t;
  t.run_start = from_unix_seconds(kStart);
  t.run_end = from_unix_seconds(kStart + 1800);
  t.events = {event("meter", kStart, 1.0), event("meter", kStart + 300, 2.0)};
  write_trace(t, dir.file("t.jsonl"));
  std::string text = testing_support::read_file(dir.file("t.jsonl"));
  text.resize(text.size() - 10);
  testing_support::write_file(dir.file("t.jsonl"), text);
  try {
    read_trace(dir.file("t.jsonl"));
    FAIL();
  } catch (const TraceFormatError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Trace, EmptyFileIsEmptyTrace) {
  TempDir dir;
  testing_support::write_file(dir.file("empty.jsonl"), "");
  const RawTrace t = read_trace(dir.file("empty.jsonl"));
  EXPECT_TRUE(t.events.empty());
  runtime::RunOptions opts;
  opts.out_dir = dir.file("out");
  const runtime::RunResult r = runtime::run_trace(reference(), t, opts);
  EXPECT_TRUE(r.frames.at("home-17").empty());
  EXPECT_EQ(r.metrics.frames_emitted, 0u);
}

TEST(Trace, ScheduleIsConserved) {
  const Config c = reference();
  Scenario s = multirate();
  s.sources[0].dropout_p = 0.4;
  s.sources[1].dropout_p = 0.2;
  s.sources[0].jitter_s = 100;
  const RawTrace t = generate_trace(s, c);
  std::map<std::string, std::size_t> seen;
  for (const TraceEvent& e : t.events) ++seen[e.source_id];
  for (const SuppressedEmission& e : t.suppressed) ++seen[e.source_id];
  EXPECT_EQ(seen["meter"], 48u);
  EXPECT_EQ(seen["tariff"], 4u);
  for (std::size_t i = 1; i < t.events.size(); ++i) EXPECT_LE(t.events[i - 1].arrival, t.events[i].arrival);
  EXPECT_EQ(t.run_start, from_unix_seconds(kStart));
  EXPECT_EQ(t.run_end, from_unix_seconds(kStart + 14400));
}

TEST(Trace, SameSeedSameTraceDifferentSeedDifferent) {
  const Config c = reference();
  Scenario s = multirate();
  s.sources[0].dropout_p = 0.2;
  s.sources[0].spike_p = 0.1;
  s.sources[0].spike_magnitude = 40;
  EXPECT_EQ(generate_trace(s, c), generate_trace(s, c));
  Scenario other = s;
  other.seed = 43;
  EXPECT_NE(generate_trace(s, c), generate_trace(other, c));

  // Adding a source leaves the others' streams untouched.
  Scenario one = s;
  one.sources.pop_back();
  const RawTrace a = generate_trace(one, c);
  const RawTrace b = generate_trace(s, c);
  std::vector<TraceEvent> meter_b;
  for (const TraceEvent& e : b.events) {
    if (e.source_id == "meter") meter_b.push_back(e);
  }
  EXPECT_EQ(a.events, meter_b);
}

TEST(Oracle, EmptyTraceWithFailPolicyIsAllDegraded) {
  Config c = reference();
  for (SignalSpec& s : c.environments[0].signals) s.gap_fill = GapFill::fail;
  RawTrace t;
  t.run_start = from_unix_seconds(kStart);
  t.run_end = from_unix_seconds(kStart + 3600);
  const auto frames = oracle_resample(t, c).at("home-17");
  ASSERT_EQ(frames.size(), 4u);
  for (const WindowFrame& f : frames) {
    EXPECT_TRUE(f.degraded);
    EXPECT_EQ(f.completeness, 0.0);
  }
}

TEST(Oracle, SingleEventIsMeasuredThenCarried) {
  Config c = reference();
  c.environments[0].signals.pop_back();
  c.environments[0].derived.clear();
  RawTrace t;
  t.run_start = from_unix_seconds(kStart);
  t.run_end = from_unix_seconds(kStart + 2700);
  t.events = {event("meter", kStart, 4.5)};
  const auto frames = oracle_resample(t, c).at("home-17");
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_EQ(frames[0].values.at("load"), (FrameValue{4.5, Quality::measured}));
  EXPECT_EQ(frames[1].values.at("load"), (FrameValue{4.5, Quality::carried}));
  EXPECT_EQ(frames[2].values.at("load"), (FrameValue{4.5, Quality::carried}));
  EXPECT_FALSE(frames[2].degraded);
}

TEST(Run, MatchesOracleOnMultirate) {
  const Config c = reference();
  const RawTrace t = generate_trace(multirate(), c);
  TempDir dir;
  runtime::RunOptions opts;
  opts.out_dir = dir.path().string();
  const runtime::RunResult r = runtime::run_trace(c, t, opts);
  EXPECT_EQ(r.frames, oracle_resample(t, c));
  EXPECT_EQ(r.frames.at("home-17").size(), 16u);
}

TEST(Run, FullDropoutGivesDegradedFramesAndNoDecisions) {
  const Config c = reference();
  Scenario s = multirate();
  for (ScenarioSource& src : s.sources) src.dropout_p = 1.0;
  TempDir dir;
  runtime::RunOptions opts;
  opts.out_dir = dir.path().string();
  const runtime::RunResult r = runtime::run_scenario(c, s, opts);
  ASSERT_EQ(r.frames.at("home-17").size(), 16u);
  for (const WindowFrame& f : r.frames.at("home-17")) EXPECT_TRUE(f.degraded);
  EXPECT_EQ(r.metrics.decisions_emitted, 0u);
  EXPECT_EQ(r.metrics.frames_degraded, 16u);
  EXPECT_TRUE(testing_support::read_lines(dir.file("decisions.jsonl")).empty());
}

TEST(Run, CountersObeyConservation) {
  Config c = reference();
  c.environments[0].queue_capacity = 4;
  Scenario s = multirate();
  s.sources[0].dropout_p = 0.2;
  s.sources[0].spike_p = 0.05;
  s.sources[0].spike_magnitude = 100;
  s.sources[0].jitter_s = 200;
  RawTrace t = generate_trace(s, c);
  t.events.push_back({"meter", t.events.back().arrival, "not json"});
  t.events.push_back({"nobody", t.events.back().arrival, payload(1, kStart)});
  TempDir dir;
  runtime::RunOptions opts;
  opts.out_dir = dir.path().string();
  const MetricsSnapshot m = runtime::run_trace(c, t, opts).metrics;
  EXPECT_EQ(m.events_received, t.events.size() - 1);
  EXPECT_EQ(m.events_received, m.events_translated + m.translate_errors);
  EXPECT_EQ(m.translate_errors, 1u);
  EXPECT_EQ(m.events_translated, m.enqueued + m.dropped_full);
  EXPECT_EQ(m.frames_emitted, 16u);
  EXPECT_EQ(m.frames_emitted, m.decisions_emitted + m.frames_degraded);
  EXPECT_EQ(testing_support::read_lines(dir.file("late_events.jsonl")).size(), m.late_events);
  EXPECT_EQ(testing_support::read_lines(dir.file("transitions.jsonl")).size(), m.transitions_written);
}

TEST(Run, DeadForwarderLeavesFramesAndTransitionsUnchanged) {
  const Config good = reference();
  Config dead = good;
  dead.environments[0].forwarders = {{"charger", ForwarderKind::http_post, "http://127.0.0.1:1/act", "power"}};
  const RawTrace t = generate_trace(multirate(), good);
  TempDir a;
  TempDir b;
  runtime::RunOptions oa;
  oa.out_dir = a.path().string();
  runtime::RunOptions ob;
  ob.out_dir = b.path().string();
  ob.forward_retry_delay = std::chrono::milliseconds(1);
  runtime::run_trace(good, t, oa);
  const MetricsSnapshot m = runtime::run_trace(dead, t, ob).metrics;
  EXPECT_GT(m.forward_failures, 0u);
  EXPECT_EQ(testing_support::read_file(a.file("frames.jsonl")), testing_support::read_file(b.file("frames.jsonl")));
  EXPECT_EQ(testing_support::read_file(a.file("transitions.jsonl")), testing_support::read_file(b.file("transitions.jsonl")));
  EXPECT_EQ(testing_support::read_file(a.file("decisions.jsonl")), testing_support::read_file(b.file("decisions.jsonl")));
}
