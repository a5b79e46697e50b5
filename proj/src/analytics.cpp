#include "agrimon/analytics.hpp"

#include <algorithm>

#include "agrimon/payload.hpp"

namespace agrimon {

std::vector<Bucket> bucketed(const Store& store, std::string_view node, Field field,
                             Timestamp start, Duration span, Duration bucket) {
  std::vector<Bucket> out;
  if (span.count() <= 0 || bucket.count() <= 0) return out;
  const Timestamp end = start + span;
  for (Timestamp b = start; b < end; b += bucket) out.push_back({b, std::min(b + bucket, end)});

  // One pass over the period; readings arrive ordered by sample time.
  std::vector<double> sums(out.size(), 0.0);
  for (const auto& r : store.query_range(node, field, start, end)) {
    auto i = static_cast<std::size_t>((r.sampled_at - start) / bucket);
    Bucket& bk = out[i];
    if (bk.count == 0) {
      bk.min = bk.max = r.value;
    } else {
      bk.min = std::min(bk.min, r.value);
      bk.max = std::max(bk.max, r.value);
    }
    ++bk.count;
    sums[i] += r.value;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].count > 0) out[i].avg = sums[i] / static_cast<double>(out[i].count);
  }
  return out;
}

std::vector<Bucket> history_day(const Store& store, std::string_view node, Field field,
                                Timestamp day_start) {
  return bucketed(store, node, field, day_start, kDay, kHour);
}

Comparison compare_previous_day(const Store& store, std::string_view node, Field field,
                                Timestamp period_start, Duration period_len, Duration bucket) {
  if (period_len.count() <= 0 || period_len > kDay) {
    throw RangeError("comparison period must be longer than 0 and at most 24 h");
  }
  if (bucket.count() <= 0) throw RangeError("bucket width must be positive");
  return {bucketed(store, node, field, period_start, period_len, bucket),
          bucketed(store, node, field, period_start - kDay, period_len, bucket)};
}

std::vector<DayExtremes> query_week(const Store& store, std::string_view node, Field field,
                                    Timestamp week_start, Timestamp now) {
  if (week_start < now - kQueryHorizon) {
    throw RangeError("queries are limited to the last 365 days");
  }
  if (week_start > now) throw RangeError("week start lies in the future");
  std::vector<DayExtremes> out;
  for (const auto& b : bucketed(store, node, field, week_start, 7 * kDay, kDay)) {
    out.push_back({b.start, b.count, b.max, b.min});
  }
  return out;
}

std::optional<Advisory> watering_advice(const Store& store, std::string_view node,
                                        const DetectorConfig& cfg) {
  auto latest = store.latest(node, Field::Humidity);
  if (!latest || !(latest->value < cfg.hum_min)) return std::nullopt;
  return Advisory{std::string(node), "watering",
                  "humidity " + format_value(latest->value) + " %RH is below " +
                      format_value(cfg.hum_min) + " %RH: consider watering",
                  latest->value, latest->sampled_at};
}

}  // namespace agrimon
