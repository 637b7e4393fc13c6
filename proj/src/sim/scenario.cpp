#include "edgeflow/sim/scenario.hpp"

#include <fstream>
#include <sstream>

#include "core/json_reader.hpp"

namespace edgeflow::sim {

using internal::index_path;
using internal::ObjectReader;
using internal::parse_enum;
using internal::require;
using nlohmann::json;

namespace {

Generator parse_generator(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  Generator g;
  static constexpr std::pair<const char*, Generator::Kind> kinds[] = {{"constant", Generator::Kind::constant},
                                                                      {"sine", Generator::Kind::sine},
                                                                      {"random_walk", Generator::Kind::random_walk}};
  g.kind = parse_enum(r.string("kind"), r.child("kind"), kinds);
  switch (g.kind) {
    case Generator::Kind::constant:
      g.value = r.number("value");
      break;
    case Generator::Kind::sine:
      g.amplitude = r.number("amplitude");
      g.period_s = r.number("period_s");
      require(g.period_s > 0.0, r.child("period_s"), "must be > 0");
      g.offset = r.number_or("offset", 0.0);
      break;
    case Generator::Kind::random_walk:
      g.step_sigma = r.number("step_sigma");
      require(g.step_sigma >= 0.0, r.child("step_sigma"), "must be >= 0");
      g.start = r.number_or("start", 0.0);
      break;
  }
  r.finish();
  return g;
}

ScenarioSource parse_source(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  ScenarioSource s;
  s.source_id = r.string("source_id");
  s.signal_id = r.string_or("signal_id", "");
  s.period_s = r.number("period_s");
  require(s.period_s > 0.0, r.child("period_s"), "must be > 0");
  s.jitter_s = r.number_or("jitter_s", 0.0);
  require(s.jitter_s >= 0.0, r.child("jitter_s"), "must be >= 0");
  // Jitter below one period (less a millisecond) keeps per-source times strictly increasing.
  require(s.jitter_s <= s.period_s - 0.001, r.child("jitter_s"), "must be smaller than period_s by at least 1 ms");
  s.dropout_p = r.number_or("dropout_p", 0.0);
  require(s.dropout_p >= 0.0 && s.dropout_p <= 1.0, r.child("dropout_p"), "must be in [0, 1]");
  s.spike_p = r.number_or("spike_p", 0.0);
  require(s.spike_p >= 0.0 && s.spike_p <= 1.0, r.child("spike_p"), "must be in [0, 1]");
  s.spike_magnitude = r.number_or("spike_magnitude", 0.0);
  s.generator = parse_generator(r.required("generator"), r.child("generator"));
  r.finish();
  return s;
}

}  // namespace

Scenario load_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(internal::line_of(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
  }
  ObjectReader r(doc, "");
  Scenario s;
  s.duration_s = r.number("duration_s");
  require(s.duration_s > 0.0, "duration_s", "must be > 0");
  if (const json* seed = r.optional("seed")) {
    if (!seed->is_number_unsigned() && !seed->is_number_integer()) throw SchemaError("seed", "expected integer");
    s.seed = seed->get<std::uint64_t>();
  }
  s.logical_clock = r.boolean_or("logical_clock", true);
  s.start_s = r.integer_or("start_s", 0);
  const json& sources = r.array("sources");
  for (std::size_t i = 0; i < sources.size(); ++i) s.sources.push_back(parse_source(sources[i], index_path("sources", i)));
  r.finish();
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

void check_scenario(const Scenario& scenario, const Config& config) {
  for (std::size_t i = 0; i < scenario.sources.size(); ++i) {
    const ScenarioSource& s = scenario.sources[i];
    const std::string p = index_path("sources", i);
    const SourceSpec* spec = config.find_source(s.source_id);
    if (!spec) throw SchemaError(p + ".source_id", "source '" + s.source_id + "' is not configured");
    if (!s.signal_id.empty() && s.signal_id != spec->translator.signal_id) {
      throw SchemaError(p + ".signal_id", "source '" + s.source_id + "' translates to signal '" +
                                              spec->translator.signal_id + "', not '" + s.signal_id + "'");
    }
  }
}

}  // namespace edgeflow::sim
