#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agrimon/core.hpp"
#include "agrimon/result.hpp"

namespace agrimon {

struct FieldValue {
  Field field;
  double value;

  bool operator==(const FieldValue&) const = default;
};

/// Reserved line name carrying the sender's claimed sample time (integer ms).
inline constexpr std::string_view kSampledAtKey = "sampled_at";

struct ParsedPayload {
  std::vector<FieldValue> values;
  std::optional<Timestamp> sampled_at;
};

// Wire grammar, one pair per line (LF or CRLF):
//
//   line  := name ':' [ws] value
//   name  := temperature | humidity | latitude | longitude | sampled_at   (any case)
//   value := ['+'|'-'] digit+ ['.' digit+]                                 (no exponent)
//
// sampled_at takes a non-negative integer and may appear at most once. A single
// trailing line terminator is allowed; any other blank line is malformed.
Result<ParsedPayload> parse_payload(std::string_view payload);

/// Inverse of parse_payload for well-formed input. Values use the shortest
/// fixed-point text that reads back to the same double.
std::string format_payload(std::span<const FieldValue> values,
                           std::optional<Timestamp> sampled_at = std::nullopt);

std::string format_value(double v);

Status validate_range(Field field, double value);

struct FieldRange {
  double min;
  double max;
};
FieldRange field_range(Field field);

}  // namespace agrimon
