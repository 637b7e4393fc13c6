#include "edgeflow/sim/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <tuple>

#include <nlohmann/json.hpp>

namespace edgeflow::sim {

using nlohmann::json;

void write_trace(const RawTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IoError", "cannot open '" + path + "' for writing");
  out << json{{"kind", "header"}, {"run_start_ns", to_unix_nanos(trace.run_start)}, {"run_end_ns", to_unix_nanos(trace.run_end)}}.dump()
      << '\n';
  for (const TraceEvent& e : trace.events) {
    out << json{{"kind", "event"}, {"source", e.source_id}, {"arrival_ns", to_unix_nanos(e.arrival)}, {"payload", e.payload}}.dump()
        << '\n';
  }
  for (const SuppressedEmission& s : trace.suppressed) {
    out << json{{"kind", "suppressed"}, {"source", s.source_id}, {"scheduled_ns", to_unix_nanos(s.scheduled)}}.dump() << '\n';
  }
}

RawTrace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot open trace '" + path + "'");
  RawTrace trace;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw TraceFormatError(lineno, std::string("malformed JSON: ") + e.what());
    }
    try {
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "header") {
        if (have_header) throw TraceFormatError(lineno, "duplicate header");
        trace.run_start = from_unix_nanos(j.at("run_start_ns").get<std::int64_t>());
        trace.run_end = from_unix_nanos(j.at("run_end_ns").get<std::int64_t>());
        have_header = true;
        continue;
      }
      if (!have_header) throw TraceFormatError(lineno, "missing header line");
      if (kind == "event") {
        trace.events.push_back({j.at("source").get<std::string>(), from_unix_nanos(j.at("arrival_ns").get<std::int64_t>()),
                                j.at("payload").get<std::string>()});
      } else if (kind == "suppressed") {
        trace.suppressed.push_back(
            {j.at("source").get<std::string>(), from_unix_nanos(j.at("scheduled_ns").get<std::int64_t>())});
      } else {
        throw TraceFormatError(lineno, "unknown line kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw TraceFormatError(lineno, e.what());
    }
  }
  return trace;
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string make_payload(const TranslatorSpec& tr, double raw, Timestamp event_time) {
  json doc = json::object();
  doc[json::json_pointer(tr.value_path)] = raw;
  if (tr.timestamp_path) {
    const std::int64_t ns = to_unix_nanos(event_time);
    json ts;
    if (tr.timestamp_unit == TimestampUnit::ms) {
      ts = ns / 1'000'000;
    } else if (ns % kNanosPerSecond == 0) {
      ts = ns / kNanosPerSecond;
    } else {
      ts = static_cast<double>(ns / 1'000'000) / 1000.0;
    }
    doc[json::json_pointer(*tr.timestamp_path)] = ts;
  }
  return doc.dump();
}

}  // namespace

RawTrace generate_trace(const Scenario& scenario, const Config& config) {
  check_scenario(scenario, config);
  RawTrace trace;
  trace.run_start = from_unix_seconds(scenario.start_s);
  trace.run_end = trace.run_start + seconds_to_duration(scenario.duration_s);

  struct Keyed {
    Timestamp arrival;
    std::size_t source_index;
    std::size_t k;
    TraceEvent event;
  };
  std::vector<Keyed> emitted;

  for (std::size_t si = 0; si < scenario.sources.size(); ++si) {
    const ScenarioSource& src = scenario.sources[si];
    const TranslatorSpec& tr = config.find_source(src.source_id)->translator;
    std::mt19937_64 rng(splitmix64(scenario.seed ^ splitmix64(fnv1a(src.source_id))));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    double walk = src.generator.start;

    for (std::size_t k = 0; static_cast<double>(k) * src.period_s < scenario.duration_s; ++k) {
      // Fixed draw order per emission keeps streams stable across settings.
      const double u_jitter = unit(rng);
      const double u_dropout = unit(rng);
      const double u_spike = unit(rng);
      const double n = noise(rng);

      const double offset_s = static_cast<double>(k) * src.period_s + u_jitter * src.jitter_s;
      const std::int64_t offset_ms = std::llround(offset_s * 1000.0);
      const Timestamp t = trace.run_start + Duration{offset_ms * 1'000'000};
      const double elapsed_s = static_cast<double>(offset_ms) / 1000.0;

      double value = 0.0;
      switch (src.generator.kind) {
        case Generator::Kind::constant:
          value = src.generator.value;
          break;
        case Generator::Kind::sine:
          value = src.generator.offset +
                  src.generator.amplitude * std::sin(2.0 * std::numbers::pi * elapsed_s / src.generator.period_s);
          break;
        case Generator::Kind::random_walk:
          value = walk;
          walk += src.generator.step_sigma * n;
          break;
      }
      if (u_spike < src.spike_p) value += src.spike_magnitude;

      if (u_dropout < src.dropout_p) {
        trace.suppressed.push_back({src.source_id, t});
        continue;
      }
      emitted.push_back({t, si, k, {src.source_id, t, make_payload(tr, value, t)}});
    }
  }

  std::sort(emitted.begin(), emitted.end(), [](const Keyed& a, const Keyed& b) {
    return std::tie(a.arrival, a.source_index, a.k) < std::tie(b.arrival, b.source_index, b.k);
  });
  trace.events.reserve(emitted.size());
  for (Keyed& e : emitted) trace.events.push_back(std::move(e.event));
  return trace;
}

}  // namespace edgeflow::sim
