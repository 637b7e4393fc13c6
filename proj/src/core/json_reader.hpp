#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "edgeflow/core/errors.hpp"

namespace edgeflow::internal {

using nlohmann::json;

inline const char* type_name(const json& j) { return j.type_name(); }

// Strict object view: every key must be consumed before `finish()`, so a
// typo in the document surfaces as a SchemaError instead of a silent default.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SchemaError(path_, std::string("expected object, got ") + type_name(j_));
  }

  std::string child(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* optional(std::string_view key) {
    seen_.insert(std::string(key));
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  const json& required(std::string_view key) {
    const json* v = optional(key);
    if (!v) throw SchemaError(child(key), "missing required field");
    return *v;
  }

  std::string string(std::string_view key) { return as_string(required(key), child(key)); }

  std::string string_or(std::string_view key, std::string fallback) {
    const json* v = optional(key);
    return v ? as_string(*v, child(key)) : fallback;
  }

  double number(std::string_view key) { return as_number(required(key), child(key)); }

  double number_or(std::string_view key, double fallback) {
    const json* v = optional(key);
    return v ? as_number(*v, child(key)) : fallback;
  }

  std::int64_t integer(std::string_view key) { return as_integer(required(key), child(key)); }

  std::int64_t integer_or(std::string_view key, std::int64_t fallback) {
    const json* v = optional(key);
    return v ? as_integer(*v, child(key)) : fallback;
  }

  bool boolean_or(std::string_view key, bool fallback) {
    const json* v = optional(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw SchemaError(child(key), std::string("expected boolean, got ") + type_name(*v));
    return v->get<bool>();
  }

  const json& array(std::string_view key) {
    const json& v = required(key);
    if (!v.is_array()) throw SchemaError(child(key), std::string("expected array, got ") + type_name(v));
    return v;
  }

  const json* array_opt(std::string_view key) {
    const json* v = optional(key);
    if (v && !v->is_array()) throw SchemaError(child(key), std::string("expected array, got ") + type_name(*v));
    return v;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw SchemaError(child(key), "unknown field");
    }
  }

  static std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw SchemaError(path, std::string("expected string, got ") + type_name(v));
    return v.get<std::string>();
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw SchemaError(path, std::string("expected number, got ") + type_name(v));
    return v.get<double>();
  }

  static std::int64_t as_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw SchemaError(path, std::string("expected integer, got ") + type_name(v));
    return v.get<std::int64_t>();
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

inline std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

inline std::string index_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

template <typename Enum, std::size_t N>
Enum parse_enum(const std::string& value, const std::string& path, const std::pair<const char*, Enum> (&table)[N]) {
  std::string allowed;
  for (const auto& [name, e] : table) {
    if (value == name) return e;
    if (!allowed.empty()) allowed += ", ";
    allowed += name;
  }
  throw SchemaError(path, "invalid value '" + value + "' (expected one of: " + allowed + ")");
}

inline void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) throw SchemaError(path, message);
}

}  // namespace edgeflow::internal
