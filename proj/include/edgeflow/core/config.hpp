#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "edgeflow/core/types.hpp"

namespace edgeflow {

// Parses a configuration document. Throws ParseError on malformed JSON and
// SchemaError (carrying an "environments[0].signals[1].unit" style path) on a
// missing, mistyped, forbidden, or unknown field. All defaults are applied.
Config load_config(std::string_view text);
Config load_config_file(const std::string& path);

struct Violation {
  std::string path;
  std::string message;
  bool operator==(const Violation&) const = default;
};

// Cross-reference and invariant checks on a structurally valid config.
// Returns an empty list iff the config is usable.
std::vector<Violation> validate_config(const Config& config);

}  // namespace edgeflow
