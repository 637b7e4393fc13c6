#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgeflow/core/time.hpp"

namespace edgeflow {

// Provenance of a value. The enumerator order is the severity order used by
// fusion: measured < corrected < carried < predicted.
enum class Quality : std::uint8_t { measured = 0, corrected = 1, carried = 2, predicted = 3 };

constexpr Quality worst(Quality a, Quality b) { return a < b ? b : a; }

std::string_view to_string(Quality q);
std::optional<Quality> quality_from_string(std::string_view s);

struct Measurement {
  std::string environment_id;
  std::string signal_id;
  Timestamp event_time;
  double value = 0.0;
  std::string unit;
  Quality quality = Quality::measured;
  std::string source_id;

  bool operator==(const Measurement&) const = default;
};

enum class Aggregation { last, mean, sum, min, max };
enum class GapFill { locf, linear, historical_mean, fail };

struct Bounds {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const Bounds&) const = default;
};

struct AnomalyParams {
  int buffer_len = 20;
  double z_threshold = 6.0;
  bool operator==(const AnomalyParams&) const = default;
};

struct Normalization {
  enum class Kind { none, minmax, zscore };
  Kind kind = Kind::none;
  double min = 0.0;   // minmax
  double max = 1.0;   // minmax
  double mean = 0.0;  // zscore
  double std = 1.0;   // zscore
  bool operator==(const Normalization&) const = default;
};

struct SignalSpec {
  std::string signal_id;
  std::string unit;
  double expected_period_s = 0.0;
  Aggregation aggregation = Aggregation::last;
  GapFill gap_fill = GapFill::locf;
  // Absent means the carried value never goes stale.
  std::optional<double> max_staleness_s;
  std::optional<Bounds> bounds;
  std::optional<AnomalyParams> anomaly;
  Normalization normalization;

  bool operator==(const SignalSpec&) const = default;
};

struct DerivedMember {
  std::string signal_id;
  double weight = 1.0;
  bool operator==(const DerivedMember&) const = default;
};

struct DerivedSignalSpec {
  std::string signal_id;
  std::vector<DerivedMember> members;
  bool operator==(const DerivedSignalSpec&) const = default;
};

enum class OnInvalid { clamp, substitute_default };

struct ActionSpec {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double default_value = 0.0;
  OnInvalid on_invalid = OnInvalid::clamp;
  bool operator==(const ActionSpec&) const = default;
};

// Per-action affine policy of the stub_linear model over the encoded features.
struct LinearPolicy {
  std::vector<double> weights;
  double bias = 0.0;
  bool operator==(const LinearPolicy&) const = default;
};

enum class ModelKind { stub_constant, stub_linear, sidecar_http };

struct ModelSpec {
  ModelKind kind = ModelKind::stub_constant;
  std::string endpoint;
  int timeout_ms = 1000;
  std::vector<std::string> features;
  std::vector<ActionSpec> actions;
  std::map<std::string, LinearPolicy> linear;
  bool operator==(const ModelSpec&) const = default;
};

enum class ForwarderKind { log, http_post, mqtt_publish };

struct ForwarderSpec {
  std::string id;
  ForwarderKind kind = ForwarderKind::log;
  std::string target;
  std::string action_field;
  bool operator==(const ForwarderSpec&) const = default;
};

struct StoreSpec {
  std::string path = "transitions.jsonl";
  bool anonymize = false;
  std::string salt;
  bool operator==(const StoreSpec&) const = default;
};

struct EnvironmentConfig {
  std::string environment_id;
  std::int64_t window_seconds = 900;
  double grace_seconds = 0.0;
  Timestamp epoch_origin{};
  // Length of the "day" used for historical slot matching and its horizon.
  std::int64_t day_seconds = 86400;
  int history_days = 7;
  std::size_t queue_capacity = 4096;
  std::vector<SignalSpec> signals;
  std::vector<DerivedSignalSpec> derived;
  ModelSpec model;
  std::string reward_expr = "0";
  std::vector<ForwarderSpec> forwarders;
  StoreSpec store;

  Duration window_length() const { return Duration{window_seconds * kNanosPerSecond}; }
  const SignalSpec* find_signal(std::string_view id) const;
  const DerivedSignalSpec* find_derived(std::string_view id) const;
  // Configured signals followed by derived signals, in declaration order.
  std::vector<std::string> all_signal_ids() const;

  bool operator==(const EnvironmentConfig&) const = default;
};

enum class TimestampUnit { s, ms };

struct TranslatorSpec {
  std::string payload_format = "json";
  std::string value_path;
  std::optional<std::string> timestamp_path;
  TimestampUnit timestamp_unit = TimestampUnit::s;
  double scale = 1.0;
  double offset = 0.0;
  std::string signal_id;
  std::string unit;
  bool operator==(const TranslatorSpec&) const = default;
};

enum class SourceKind { sim, http, mqtt };

struct MqttConnection {
  std::string host = "127.0.0.1";
  int port = 1883;
  std::string topic;
  std::string client_id;
  bool operator==(const MqttConnection&) const = default;
};

struct SourceSpec {
  std::string source_id;
  SourceKind kind = SourceKind::sim;
  MqttConnection mqtt;  // only meaningful for kind == mqtt
  TranslatorSpec translator;
  std::vector<std::string> environments;
  bool operator==(const SourceSpec&) const = default;
};

struct Config {
  std::vector<EnvironmentConfig> environments;
  std::vector<SourceSpec> sources;

  const EnvironmentConfig* find_environment(std::string_view id) const;
  const SourceSpec* find_source(std::string_view id) const;
  bool operator==(const Config&) const = default;
};

std::string_view to_string(Aggregation a);
std::string_view to_string(GapFill g);
std::string_view to_string(ModelKind k);
std::string_view to_string(ForwarderKind k);
std::string_view to_string(SourceKind k);

}  // namespace edgeflow
