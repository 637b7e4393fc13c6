#pragma once

#include <string>
#include <string_view>

#include "edgeflow/core/errors.hpp"
#include "edgeflow/core/types.hpp"

namespace edgeflow {

struct RawEvent {
  std::string source_id;
  Timestamp arrival_time;
  std::string payload;
  SourceKind protocol = SourceKind::sim;
};

class TranslateError : public Error {
 public:
  using Error::Error;
};

class PayloadParseError : public TranslateError {
 public:
  explicit PayloadParseError(const std::string& detail) : TranslateError("PayloadParseError", detail) {}
};

class FieldMissing : public TranslateError {
 public:
  explicit FieldMissing(const std::string& path) : TranslateError("FieldMissing", "field '" + path + "' is missing") {}
};

class NonFiniteValue : public TranslateError {
 public:
  explicit NonFiniteValue(const std::string& detail) : TranslateError("NonFiniteValue", detail) {}
};

class TimestampInvalid : public TranslateError {
 public:
  explicit TimestampInvalid(const std::string& detail) : TranslateError("TimestampInvalid", detail) {}
};

// Pure: extracts, scales and stamps one standardized measurement from a JSON
// payload. The environment id is left empty; routing fills it in.
// `earliest` is the latest epoch origin among the source's environments.
Measurement translate(const RawEvent& event, const TranslatorSpec& spec, Timestamp earliest = Timestamp{});

}  // namespace edgeflow
