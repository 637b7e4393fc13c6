#include <gtest/gtest.h>

#include "edgeflow/window/window_manager.hpp"

using namespace edgeflow;

namespace {

Timestamp at(std::int64_t s) { return from_unix_seconds(s); }

EnvironmentConfig two_rate_env() {
  EnvironmentConfig env;
  env.environment_id = "e";
  env.window_seconds = 900;
  SignalSpec fast;
  fast.signal_id = "fast";
  fast.aggregation = Aggregation::mean;
  SignalSpec slow;
  slow.signal_id = "slow";
  slow.aggregation = Aggregation::last;
  env.signals = {fast, slow};
  return env;
}

Measurement m(const std::string& signal, std::int64_t t, double v) {
  Measurement out;
  out.environment_id = "e";
  out.signal_id = signal;
  out.event_time = at(t);
  out.value = v;
  return out;
}

}  // namespace

TEST(WindowManager, MultiRateFourHoursGivesSixteenFrames) {
  const EnvironmentConfig env = two_rate_env();
  Metrics metrics;
  WindowManager wm(env, at(0), metrics);
  std::vector<WindowFrame> frames;
  for (std::int64_t t = 0; t < 4 * 3600; t += 300) {
    for (auto& f : wm.advance(at(t))) frames.push_back(f);
    wm.ingest(m("fast", t, static_cast<double>(t)));
    if (t % 3600 == 0) wm.ingest(m("slow", t, t / 3600.0));
  }
  for (auto& f : wm.close_through(at(4 * 3600))) frames.push_back(f);

  ASSERT_EQ(frames.size(), 16u);
  int measured = 0, carried = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const WindowFrame& f = frames[i];
    EXPECT_EQ(f.window.start, at(static_cast<std::int64_t>(i) * 900));
    EXPECT_EQ(f.window.end - f.window.start, std::chrono::seconds(900));
    EXPECT_EQ(f.values.at("fast").quality, Quality::measured);
    EXPECT_EQ(f.values.at("fast").value, (3.0 * 900 * i + 300 + 600) / 3.0);
    const Quality q = f.values.at("slow").quality;
    measured += q == Quality::measured;
    carried += q == Quality::carried;
    EXPECT_EQ(f.values.at("slow").value, static_cast<double>(i / 4));
  }
  EXPECT_EQ(measured, 4);
  EXPECT_EQ(carried, 12);
  EXPECT_EQ(metrics.snapshot().gaps_filled.at("locf"), 12u);
  EXPECT_EQ(metrics.frames_emitted.load(), 16u);
}

TEST(WindowManager, LateEventIsLoggedNotMerged) {
  const EnvironmentConfig env = two_rate_env();
  Metrics metrics;
  std::vector<LateEvent> late;
  WindowManager wm(env, at(0), metrics, [&](const LateEvent& e) { late.push_back(e); });
  wm.ingest(m("fast", 10, 1.0));
  wm.ingest(m("slow", 10, 1.0));
  auto closed = wm.advance(at(901));
  ASSERT_EQ(closed.size(), 1u);
  wm.ingest(m("fast", 899, 500.0));
  ASSERT_EQ(late.size(), 1u);
  EXPECT_EQ(late[0].window_start, at(0));
  EXPECT_EQ(late[0].value, 500.0);
  EXPECT_EQ(metrics.late_events.load(), 1u);
  const nlohmann::json j = late_event_to_json(late[0]);
  EXPECT_EQ(j.dump(), R"({"env":"e","event_time":899000000000,"signal":"fast","value":500.0,"window_start":0})");
  EXPECT_EQ(closed[0].values.at("fast").value, 1.0);
}

TEST(WindowManager, WatermarkIsStrictlyAfterEndPlusGrace) {
  EnvironmentConfig env = two_rate_env();
  env.grace_seconds = 30;
  Metrics metrics;
  WindowManager wm(env, at(0), metrics);
  wm.ingest(m("fast", 1, 1.0));
  wm.ingest(m("slow", 1, 1.0));
  EXPECT_TRUE(wm.advance(at(930)).empty());
  wm.ingest(m("fast", 899, 3.0));
  const auto frames = wm.advance(at(931));
  ASSERT_EQ(frames.size(), 1u);
  EXPECT_EQ(frames[0].values.at("fast").value, 2.0);
  EXPECT_EQ(metrics.late_events.load(), 0u);
}

TEST(WindowManager, EventsBeforeFirstWindowAreLate) {
  const EnvironmentConfig env = two_rate_env();
  Metrics metrics;
  WindowManager wm(env, at(1000), metrics);
  EXPECT_EQ(wm.next_window_start(), at(900));
  wm.ingest(m("fast", 899, 1.0));
  EXPECT_EQ(metrics.late_events.load(), 1u);
}

TEST(WindowManager, AllCarriedFrameHasZeroCompleteness) {
  const EnvironmentConfig env = two_rate_env();
  Metrics metrics;
  WindowManager wm(env, at(0), metrics);
  wm.ingest(m("fast", 5, 1.0));
  wm.ingest(m("slow", 5, 2.0));
  const auto frames = wm.close_through(at(1800));
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_EQ(frames[0].completeness, 1.0);
  EXPECT_EQ(frames[1].completeness, 0.0);
  EXPECT_FALSE(frames[1].degraded);
  for (const auto& [id, v] : frames[1].values) EXPECT_EQ(v.quality, Quality::carried) << id;
}

TEST(WindowManager, UnfillableSignalDegradesFrameAndFusion) {
  EnvironmentConfig env = two_rate_env();
  env.signals[1].gap_fill = GapFill::fail;
  env.derived = {{"blend", {{"fast", 1.0}, {"slow", 1.0}}}};
  Metrics metrics;
  WindowManager wm(env, at(0), metrics);
  wm.ingest(m("fast", 5, 4.0));
  const auto frames = wm.close_through(at(900));
  ASSERT_EQ(frames.size(), 1u);
  const WindowFrame& f = frames[0];
  EXPECT_TRUE(f.degraded);
  EXPECT_EQ(f.values.at("slow"), (FrameValue{0.0, Quality::predicted}));
  EXPECT_EQ(f.values.at("blend"), (FrameValue{0.0, Quality::predicted}));
  EXPECT_EQ(f.values.at("fast"), (FrameValue{4.0, Quality::measured}));
  EXPECT_EQ(f.completeness, 0.5);
  EXPECT_EQ(f.values.size(), 3u);
  EXPECT_EQ(metrics.frames_degraded.load(), 1u);
}

TEST(WindowManager, AnomalyCorrectionCountsAndMarksQuality) {
  EnvironmentConfig env = two_rate_env();
  env.signals[0].anomaly = AnomalyParams{20, 6.0};
  env.signals[0].aggregation = Aggregation::last;
  Metrics metrics;
  WindowManager wm(env, at(0), metrics);
  for (int i = 0; i < 10; ++i) wm.ingest(m("fast", i, 10.0 + 0.1 * (i % 3)));
  wm.ingest(m("fast", 20, 1000.0));
  wm.ingest(m("slow", 1, 1.0));
  const auto frames = wm.close_through(at(900));
  EXPECT_EQ(frames[0].values.at("fast"), (FrameValue{10.1, Quality::corrected}));
  EXPECT_EQ(metrics.anomalies_corrected.load(), 1u);
}

TEST(WindowManager, SamplesAreOrderedByEventTimeNotArrival) {
  const EnvironmentConfig env = two_rate_env();
  Metrics metrics;
  WindowManager wm(env, at(0), metrics);
  wm.ingest(m("slow", 200, 2.0));
  wm.ingest(m("slow", 100, 1.0));
  wm.ingest(m("fast", 1, 1.0));
  EXPECT_EQ(wm.close_through(at(900))[0].values.at("slow").value, 2.0);
}

TEST(FrameJson, SortedKeysAndRoundTrip) {
  WindowFrame f;
  f.environment_id = "e";
  f.window = {at(900), at(1800)};
  f.values = {{"b", {1.5, Quality::carried}}, {"a", {2.0, Quality::measured}}};
  f.completeness = 0.5;
  const nlohmann::json j = frame_to_json(f);
  EXPECT_EQ(j.dump(),
            R"({"completeness":0.5,"degraded":false,"env":"e","qual":{"a":"measured","b":"carried"},"values":{"a":2.0,"b":1.5},"window_end":1800,"window_start":900})");
  EXPECT_EQ(frame_from_json(j), f);
}
