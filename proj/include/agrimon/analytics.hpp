#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agrimon/config.hpp"
#include "agrimon/core.hpp"
#include "agrimon/store.hpp"

namespace agrimon {

/// Aggregate of the readings sampled in [start, end). A bucket with no
/// readings is a gap and its avg/min/max are meaningless (reported as 0).
struct Bucket {
  Timestamp start;
  Timestamp end;
  std::size_t count = 0;
  double avg = 0.0;
  double min = 0.0;
  double max = 0.0;

  bool gap() const { return count == 0; }
};

/// Consecutive buckets of width `bucket` covering [start, start + span);
/// the last one is clipped to the span.
std::vector<Bucket> bucketed(const Store& store, std::string_view node, Field field,
                             Timestamp start, Duration span, Duration bucket);

/// 24 hourly buckets over [day_start, day_start + 24h).
std::vector<Bucket> history_day(const Store& store, std::string_view node, Field field,
                                Timestamp day_start);

struct Comparison {
  std::vector<Bucket> current;
  std::vector<Bucket> previous;  // the same period, 24 h earlier
};

/// Throws RangeError unless 0 < period_len <= 24h and bucket > 0.
Comparison compare_previous_day(const Store& store, std::string_view node, Field field,
                                Timestamp period_start, Duration period_len,
                                Duration bucket = kHour);

struct DayExtremes {
  Timestamp day_start;
  std::size_t count = 0;
  double high = 0.0;
  double low = 0.0;

  bool gap() const { return count == 0; }
};

inline constexpr Duration kQueryHorizon = 365 * kDay;

/// Daily high/low for the 7 days from week_start. Throws RangeError when
/// week_start is more than a year before `now` or after it.
std::vector<DayExtremes> query_week(const Store& store, std::string_view node, Field field,
                                    Timestamp week_start, Timestamp now);

struct Advisory {
  std::string node_id;
  std::string kind;  // "watering"
  std::string message;
  double value = 0.0;
  Timestamp reading_at;
};

/// Watering advice when the node's latest humidity reading is below hum_min.
std::optional<Advisory> watering_advice(const Store& store, std::string_view node,
                                        const DetectorConfig& cfg);

}  // namespace agrimon
