#include "agrimon/payload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

namespace agrimon {
namespace {

bool is_ws(char c) { return c == ' ' || c == '\t'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
  return s;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_digit);
}

bool is_decimal(std::string_view s) {
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.remove_prefix(1);
  auto dot = s.find('.');
  if (dot == std::string_view::npos) return all_digits(s);
  return all_digits(s.substr(0, dot)) && all_digits(s.substr(dot + 1));
}

ValidationError fail(ValidationReason reason, std::size_t line, std::string_view what) {
  return {reason, "line " + std::to_string(line) + ": " + std::string(what)};
}

}  // namespace

Result<ParsedPayload> parse_payload(std::string_view payload) {
  if (std::all_of(payload.begin(), payload.end(),
                  [](char c) { return is_ws(c) || c == '\r' || c == '\n'; })) {
    return ValidationError{ValidationReason::Empty, "empty payload"};
  }

  ParsedPayload out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < payload.size()) {
    auto end = payload.find('\n', pos);
    const bool terminated = end != std::string_view::npos;
    if (!terminated) end = payload.size();
    std::string_view line = payload.substr(pos, end - pos);
    pos = terminated ? end + 1 : end;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      return fail(ValidationReason::Malformed, line_no, "missing ':'");
    }
    auto name = trim(line.substr(0, colon));
    auto text = trim(line.substr(colon + 1));
    if (name.empty()) return fail(ValidationReason::Malformed, line_no, "missing name");

    if (name.size() == kSampledAtKey.size() &&
        std::equal(name.begin(), name.end(), kSampledAtKey.begin(),
                   [](char a, char b) { return std::tolower(static_cast<unsigned char>(a)) == b; })) {
      if (text.empty()) return fail(ValidationReason::Malformed, line_no, "empty value");
      if (out.sampled_at) return fail(ValidationReason::Malformed, line_no, "repeated sampled_at");
      std::int64_t ms = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), ms);
      if (!all_digits(text) || ec != std::errc{} || ptr != text.data() + text.size()) {
        return fail(ValidationReason::NonNumeric, line_no, "sampled_at is not a millisecond count");
      }
      out.sampled_at = Timestamp(ms);
      continue;
    }

    auto field = field_from_name(name);
    if (!field) return fail(ValidationReason::UnknownField, line_no, "unknown field");
    if (text.empty()) return fail(ValidationReason::Malformed, line_no, "empty value");
    if (!is_decimal(text)) return fail(ValidationReason::NonNumeric, line_no, "not a decimal");

    // from_chars rejects a leading '+'.
    std::string_view digits = text.front() == '+' ? text.substr(1) : text;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || !std::isfinite(value)) {
      return fail(ValidationReason::NonNumeric, line_no, "value out of representable range");
    }
    out.values.push_back({*field, value});
  }

  if (out.values.empty()) return ValidationError{ValidationReason::Empty, "no measurements"};
  return out;
}

std::string format_value(double v) {
  char buf[512];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  return std::string(buf, r.ptr);
}

std::string format_payload(std::span<const FieldValue> values, std::optional<Timestamp> sampled_at) {
  std::string out;
  for (const auto& fv : values) {
    out += field_name(fv.field);
    out += ": ";
    out += format_value(fv.value);
    out += '\n';
  }
  if (sampled_at) {
    out += kSampledAtKey;
    out += ": ";
    out += std::to_string(sampled_at->millis());
    out += '\n';
  }
  return out;
}

FieldRange field_range(Field field) {
  switch (field) {
    case Field::Temperature: return {-50.0, 80.0};
    case Field::Humidity: return {0.0, 100.0};
    case Field::Latitude: return {-90.0, 90.0};
    case Field::Longitude: return {-180.0, 180.0};
  }
  return {0.0, 0.0};
}

Status validate_range(Field field, double value) {
  auto [lo, hi] = field_range(field);
  if (!(value >= lo && value <= hi)) {
    return ValidationError{ValidationReason::OutOfRange,
                           std::string(field_name(field)) + " " + format_value(value) +
                               " outside [" + format_value(lo) + ", " + format_value(hi) + "]"};
  }
  return {};
}

}  // namespace agrimon
