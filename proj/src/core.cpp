#include "agrimon/core.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace agrimon {
namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

constexpr std::array<std::string_view, 4> kFieldNames = {"temperature", "humidity", "latitude",
                                                         "longitude"};
constexpr std::array<std::string_view, 5> kReasonNames = {"UnknownField", "Malformed", "Empty",
                                                          "NonNumeric", "OutOfRange"};
constexpr std::array<std::string_view, 9> kAlertNames = {
    "FloodingSuspected", "DataLossSuspected",  "StaleData",
    "DataDelay",         "GpsTamper",          "MalformedBurst",
    "UnauthorizedSource", "ExtremeTemperature", "ExtremeHumidity"};

}  // namespace

std::string_view field_name(Field f) { return kFieldNames[static_cast<std::size_t>(f)]; }

std::optional<Field> field_from_name(std::string_view name) {
  name = trim(name);
  for (std::size_t i = 0; i < kFieldNames.size(); ++i) {
    if (iequals(name, kFieldNames[i])) return static_cast<Field>(i);
  }
  return std::nullopt;
}

std::string_view reason_name(ValidationReason r) {
  return kReasonNames[static_cast<std::size_t>(r)];
}

std::optional<ValidationReason> reason_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kReasonNames.size(); ++i) {
    if (name == kReasonNames[i]) return static_cast<ValidationReason>(i);
  }
  return std::nullopt;
}

RejectionReason to_rejection(ValidationReason r) {
  return static_cast<RejectionReason>(static_cast<int>(r) + 1);
}

std::string_view rejection_name(RejectionReason r) {
  if (r == RejectionReason::UnauthorizedSource) return "UnauthorizedSource";
  return reason_name(static_cast<ValidationReason>(static_cast<int>(r) - 1));
}

std::optional<RejectionReason> rejection_from_name(std::string_view name) {
  if (name == "UnauthorizedSource") return RejectionReason::UnauthorizedSource;
  if (auto v = reason_from_name(name)) return to_rejection(*v);
  return std::nullopt;
}

std::string_view alert_kind_name(AlertKind k) { return kAlertNames[static_cast<std::size_t>(k)]; }

std::optional<AlertKind> alert_kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kAlertNames.size(); ++i) {
    if (name == kAlertNames[i]) return static_cast<AlertKind>(i);
  }
  return std::nullopt;
}

std::optional<Timestamp> parse_iso_date(std::string_view text) {
  using namespace std::chrono;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto number = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    auto sub = text.substr(pos, len);
    if (!std::all_of(sub.begin(), sub.end(), [](char c) { return c >= '0' && c <= '9'; }))
      return std::nullopt;
    std::from_chars(sub.data(), sub.data() + sub.size(), v);
    return v;
  };
  auto y = number(0, 4), m = number(5, 2), d = number(8, 2);
  if (!y || !m || !d) return std::nullopt;
  year_month_day ymd{year{*y}, month{static_cast<unsigned>(*m)}, day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  auto ms = duration_cast<milliseconds>(sys_days{ymd}.time_since_epoch());
  if (ms.count() < 0) return std::nullopt;
  return Timestamp(ms.count());
}

std::string format_iso_date(Timestamp t) {
  using namespace std::chrono;
  auto dp = floor<days>(sys_time<milliseconds>(milliseconds(t.millis())));
  year_month_day ymd{dp};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace agrimon
