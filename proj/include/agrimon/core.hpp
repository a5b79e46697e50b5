#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace agrimon {

using Duration = std::chrono::milliseconds;

/// Integer milliseconds since the Unix epoch. All window arithmetic happens on
/// this type so that simulated runs never accumulate floating-point drift.
class Timestamp {
 public:
  constexpr Timestamp() = default;
  constexpr explicit Timestamp(std::int64_t millis) : millis_(millis) {}

  static constexpr Timestamp from_seconds(double s) {
    return Timestamp(static_cast<std::int64_t>(s * 1000.0 + (s >= 0 ? 0.5 : -0.5)));
  }

  constexpr std::int64_t millis() const { return millis_; }
  constexpr double seconds() const { return static_cast<double>(millis_) / 1000.0; }

  constexpr auto operator<=>(const Timestamp&) const = default;

  constexpr Timestamp operator+(Duration d) const { return Timestamp(millis_ + d.count()); }
  constexpr Timestamp operator-(Duration d) const { return Timestamp(millis_ - d.count()); }
  constexpr Duration operator-(Timestamp o) const { return Duration(millis_ - o.millis_); }
  constexpr Timestamp& operator+=(Duration d) {
    millis_ += d.count();
    return *this;
  }

 private:
  std::int64_t millis_ = 0;
};

constexpr Duration seconds_to_duration(double s) {
  return Duration(static_cast<std::int64_t>(s * 1000.0 + (s >= 0 ? 0.5 : -0.5)));
}

inline constexpr Duration kHour = std::chrono::hours(1);
inline constexpr Duration kDay = std::chrono::hours(24);

enum class Field { Temperature, Humidity, Latitude, Longitude };

inline constexpr Field kAllFields[] = {Field::Temperature, Field::Humidity, Field::Latitude,
                                       Field::Longitude};

std::string_view field_name(Field f);
/// Case-insensitive, surrounding whitespace ignored.
std::optional<Field> field_from_name(std::string_view name);

enum class ValidationReason { UnknownField, Malformed, Empty, NonNumeric, OutOfRange };

std::string_view reason_name(ValidationReason r);
std::optional<ValidationReason> reason_from_name(std::string_view name);

struct ValidationError {
  ValidationReason reason;
  std::string detail;
};

/// Why the gateway refused a packet. Whitelist failures come first; the rest
/// mirror ValidationReason.
enum class RejectionReason { UnauthorizedSource, UnknownField, Malformed, Empty, NonNumeric, OutOfRange };

RejectionReason to_rejection(ValidationReason r);
std::string_view rejection_name(RejectionReason r);
std::optional<RejectionReason> rejection_from_name(std::string_view name);

struct Rejection {
  Timestamp at;
  std::string source_address;
  RejectionReason reason = RejectionReason::Malformed;
  std::string detail;

  bool operator==(const Rejection&) const = default;
};

/// An unvalidated transmission. Nothing about the payload is trusted.
struct RawPacket {
  std::string source_address;
  std::string payload;
  Timestamp sent_at;
  Timestamp arrived_at;

  bool operator==(const RawPacket&) const = default;
};

using Seq = std::uint64_t;

struct SensorReading {
  std::string node_id;
  Field field = Field::Temperature;
  double value = 0.0;
  Timestamp sampled_at;
  Timestamp received_at;
  Seq seq = 0;  // 0 until the store assigns one

  bool operator==(const SensorReading&) const = default;
};

enum class AlertKind {
  FloodingSuspected,
  DataLossSuspected,
  StaleData,
  DataDelay,
  GpsTamper,
  MalformedBurst,
  UnauthorizedSource,
  ExtremeTemperature,
  ExtremeHumidity,
};

inline constexpr AlertKind kAllAlertKinds[] = {
    AlertKind::FloodingSuspected, AlertKind::DataLossSuspected, AlertKind::StaleData,
    AlertKind::DataDelay,         AlertKind::GpsTamper,         AlertKind::MalformedBurst,
    AlertKind::UnauthorizedSource, AlertKind::ExtremeTemperature, AlertKind::ExtremeHumidity,
};

std::string_view alert_kind_name(AlertKind k);
std::optional<AlertKind> alert_kind_from_name(std::string_view name);

struct AlertEvent {
  std::uint64_t alert_id = 0;  // assigned by the store
  AlertKind kind = AlertKind::FloodingSuspected;
  std::optional<std::string> node_id;
  Timestamp detected_at;
  std::optional<Timestamp> window_start;
  std::optional<Timestamp> window_end;
  std::string evidence;
  std::optional<double> value;

  bool operator==(const AlertEvent&) const = default;
};

/// Raised for user-facing range violations, e.g. a week query older than a year.
class RangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses "YYYY-MM-DD" into UTC midnight.
std::optional<Timestamp> parse_iso_date(std::string_view text);
std::string format_iso_date(Timestamp t);

}  // namespace agrimon
