#include "edgeflow/ingest/translator.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace edgeflow {

using nlohmann::json;

namespace {

const json& lookup(const json& doc, const std::string& path) {
  try {
    const json::json_pointer ptr(path);
    if (!doc.contains(ptr)) throw FieldMissing(path);
    return doc.at(ptr);
  } catch (const json::exception&) {
    throw FieldMissing(path);
  }
}

Timestamp to_timestamp(const json& v, TimestampUnit unit, const std::string& path) {
  const std::int64_t per_unit = unit == TimestampUnit::s ? kNanosPerSecond : 1'000'000;
  if (v.is_number_integer()) {
    const std::int64_t raw = v.get<std::int64_t>();
    if (raw < 0 || raw > std::numeric_limits<std::int64_t>::max() / per_unit) {
      throw TimestampInvalid("timestamp at '" + path + "' is out of range");
    }
    return from_unix_nanos(raw * per_unit);
  }
  if (v.is_number_float()) {
    const double ns = v.get<double>() * static_cast<double>(per_unit);
    if (!std::isfinite(ns) || ns < 0.0 || ns >= 9.2e18) {
      throw TimestampInvalid("timestamp at '" + path + "' is out of range");
    }
    return from_unix_nanos(std::llround(ns));
  }
  throw TimestampInvalid("timestamp at '" + path + "' is not numeric");
}

}  // namespace

Measurement translate(const RawEvent& event, const TranslatorSpec& spec, Timestamp earliest) {
  json doc;
  try {
    doc = json::parse(event.payload);
  } catch (const json::parse_error& e) {
    throw PayloadParseError(e.what());
  }

  const json& raw = lookup(doc, spec.value_path);
  double value = 0.0;
  if (raw.is_number()) {
    value = raw.get<double>();
  } else if (raw.is_boolean()) {
    value = raw.get<bool>() ? 1.0 : 0.0;
  } else {
    throw NonFiniteValue("value at '" + spec.value_path + "' is " + raw.type_name() + ", not a number");
  }
  value = value * spec.scale + spec.offset;
  if (!std::isfinite(value)) throw NonFiniteValue("value at '" + spec.value_path + "' is not finite after scaling");

  Timestamp event_time = event.arrival_time;
  if (spec.timestamp_path) event_time = to_timestamp(lookup(doc, *spec.timestamp_path), spec.timestamp_unit, *spec.timestamp_path);
  if (event_time < earliest) throw TimestampInvalid("timestamp precedes the epoch origin");

  Measurement m;
  m.signal_id = spec.signal_id;
  m.event_time = event_time;
  m.value = value;
  m.unit = spec.unit;
  m.quality = Quality::measured;
  m.source_id = event.source_id;
  return m;
}

}  // namespace edgeflow
