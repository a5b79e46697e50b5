#include "agrimon/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "agrimon/payload.hpp"

namespace agrimon {
namespace {

constexpr Timestamp kBeginning{std::numeric_limits<std::int64_t>::min()};

std::string percent(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.2f%%", rate * 100.0);
  return buf;
}

template <class CountFn>
WindowStats compute_stats(CountFn count, Timestamp now, const DetectorConfig& cfg) {
  const Duration w = cfg.window();
  WindowStats s = WindowStats::from_counts(count(now - w, now), count(now - 2 * w, now - w), now);
  const auto buckets = static_cast<std::size_t>(cfg.history().count() / 1000);
  s.trend.reserve(buckets);
  Timestamp start = now - cfg.history();
  for (std::size_t i = 0; i < buckets; ++i) {
    Timestamp b = start + std::chrono::seconds(static_cast<std::int64_t>(i));
    s.trend.push_back(count(b, b + std::chrono::seconds(1)));
  }
  s.total = count(kBeginning, now);
  return s;
}

}  // namespace

WindowStats WindowStats::from_counts(std::size_t recent, std::size_t prior, Timestamp now) {
  WindowStats s;
  s.now = now;
  s.recent_count = recent;
  s.prior_count = prior;
  if (prior > 0) {
    s.rate_of_change =
        (static_cast<double>(recent) - static_cast<double>(prior)) / static_cast<double>(prior);
  }
  return s;
}

WindowStats window_stats(const Store& store, Timestamp now, const DetectorConfig& cfg) {
  return compute_stats([&](Timestamp a, Timestamp b) { return store.count_received(a, b); }, now,
                       cfg);
}

WindowStats window_stats(const Store& store, std::string_view node_id, Timestamp now,
                         const DetectorConfig& cfg) {
  return compute_stats(
      [&](Timestamp a, Timestamp b) { return store.count_received(node_id, a, b); }, now, cfg);
}

std::optional<AlertEvent> check_volume(const WindowStats& stats, const DetectorConfig& cfg) {
  if (!stats.rate_of_change) return std::nullopt;
  const double rate = *stats.rate_of_change;
  AlertEvent a;
  if (rate >= cfg.rise_threshold) {
    a.kind = AlertKind::FloodingSuspected;
  } else if (rate <= -cfg.drop_threshold) {
    a.kind = AlertKind::DataLossSuspected;
  } else {
    return std::nullopt;
  }
  a.detected_at = stats.now;
  a.window_start = stats.now - 2 * cfg.window();
  a.window_end = stats.now;
  a.value = rate;
  a.evidence = "arrival volume " + percent(rate) + ": " + std::to_string(stats.recent_count) +
               " readings in the last " + format_value(cfg.window_s) + " s vs " +
               std::to_string(stats.prior_count) + " in the window before";
  return a;
}

std::optional<AlertEvent> check_stale(const Store& store, std::string_view node_id, Timestamp now,
                                      const DetectorConfig& cfg, Timestamp monitoring_since) {
  auto last = store.last_received(node_id);
  const Timestamp reference = last.value_or(monitoring_since);
  const Duration age = now - reference;
  if (age <= cfg.stale_timeout()) return std::nullopt;
  AlertEvent a;
  a.kind = AlertKind::StaleData;
  a.node_id = std::string(node_id);
  a.detected_at = now;
  a.window_start = reference;
  a.window_end = now;
  a.value = static_cast<double>(age.count()) / 1000.0;
  a.evidence = last ? "no data for " + format_value(*a.value) + " s"
                    : "node has not reported since monitoring started " +
                          format_value(*a.value) + " s ago";
  return a;
}

std::optional<AlertEvent> check_delay(const Store& store, Timestamp now, const DetectorConfig& cfg) {
  const Timestamp from = now - cfg.window();
  std::size_t delayed = 0;
  Duration worst{0};
  std::set<std::string> nodes;
  for (const auto& r : store.received_between(from, now)) {
    const Duration lag = r.received_at - r.sampled_at;
    if (lag > cfg.delay_threshold()) {
      ++delayed;
      worst = std::max(worst, lag);
      nodes.insert(r.node_id);
    }
  }
  if (delayed < static_cast<std::size_t>(cfg.delay_min_count)) return std::nullopt;
  AlertEvent a;
  a.kind = AlertKind::DataDelay;
  if (nodes.size() == 1) a.node_id = *nodes.begin();
  a.detected_at = now;
  a.window_start = from;
  a.window_end = now;
  a.value = static_cast<double>(delayed);
  a.evidence = std::to_string(delayed) + " readings arrived more than " +
               format_value(cfg.delay_threshold_s) + " s after their sample time (worst " +
               format_value(static_cast<double>(worst.count()) / 1000.0) + " s)";
  return a;
}

double haversine_m(GeoPoint a, GeoPoint b) {
  constexpr double kRad = std::numbers::pi / 180.0;
  const double phi1 = a.lat * kRad, phi2 = b.lat * kRad;
  const double dphi = (b.lat - a.lat) * kRad;
  const double dlambda = (b.lon - a.lon) * kRad;
  const double s1 = std::sin(dphi / 2), s2 = std::sin(dlambda / 2);
  const double h = std::clamp(s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2, 0.0, 1.0);
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

std::optional<GpsFix> latest_fix(const Store& store, std::string_view node_id) {
  auto lat = store.latest(node_id, Field::Latitude);
  auto lon = store.latest(node_id, Field::Longitude);
  if (!lat || !lon) return std::nullopt;
  return GpsFix{std::string(node_id), {lat->value, lon->value}, lat->sampled_at, lat->seq};
}

std::optional<AlertEvent> check_gps(const GpsFix& previous, const GpsFix& current,
                                    const DetectorConfig& cfg) {
  const double moved = haversine_m(previous.position, current.position);
  if (!(moved > cfg.gps_displacement_m)) return std::nullopt;
  AlertEvent a;
  a.kind = AlertKind::GpsTamper;
  a.node_id = current.node_id;
  a.detected_at = current.at;
  a.window_start = previous.at;
  a.window_end = current.at;
  a.value = moved;
  char buf[160];
  std::snprintf(buf, sizeof buf, "fix moved %.1f m (%.6f, %.6f) -> (%.6f, %.6f)", moved,
                previous.position.lat, previous.position.lon, current.position.lat,
                current.position.lon);
  a.evidence = buf;
  return a;
}

std::optional<AlertEvent> check_extremes(const SensorReading& r, const DetectorConfig& cfg) {
  AlertEvent a;
  a.node_id = r.node_id;
  a.detected_at = r.received_at;
  a.value = r.value;
  if (r.field == Field::Temperature && (r.value > cfg.temp_max || r.value < cfg.temp_min)) {
    a.kind = AlertKind::ExtremeTemperature;
    a.evidence = "temperature " + format_value(r.value) + " C outside [" +
                 format_value(cfg.temp_min) + ", " + format_value(cfg.temp_max) + "]";
    return a;
  }
  if (r.field == Field::Humidity && (r.value > cfg.hum_max || r.value < cfg.hum_min)) {
    a.kind = AlertKind::ExtremeHumidity;
    a.evidence = "humidity " + format_value(r.value) + " %RH outside [" +
                 format_value(cfg.hum_min) + ", " + format_value(cfg.hum_max) + "]";
    return a;
  }
  return std::nullopt;
}

Detector::Detector(Store& store, const DetectorConfig& cfg, std::vector<std::string> expected_nodes,
                   Timestamp monitoring_since)
    : store_(store), cfg_(cfg), expected_(std::move(expected_nodes)), since_(monitoring_since) {
  cfg_.validate();
  // Carry cooldowns across restarts.
  for (const auto& a : store_.query_alerts(kBeginning, Timestamp(std::numeric_limits<std::int64_t>::max()))) {
    auto& slot = last_raised_[{a.kind, a.node_id}];
    slot = std::max(slot, a.detected_at);
  }
}

std::optional<AlertEvent> Detector::submit(AlertEvent alert) {
  CooldownKey key{alert.kind, alert.node_id};
  auto it = last_raised_.find(key);
  if (it != last_raised_.end() && alert.detected_at - it->second < cfg_.alert_cooldown()) {
    return std::nullopt;
  }
  alert.alert_id = store_.append_alert(alert);
  last_raised_.insert_or_assign(std::move(key), alert.detected_at);
  return alert;
}

std::vector<AlertEvent> Detector::evaluate(Timestamp now) {
  std::vector<AlertEvent> raised;
  auto offer = [&](std::optional<AlertEvent> a) {
    if (!a) return;
    if (auto stored = submit(std::move(*a))) raised.push_back(std::move(*stored));
  };

  if (now - since_ >= 2 * cfg_.window()) {
    offer(check_volume(window_stats(store_, now, cfg_), cfg_));
  }

  std::vector<std::string> nodes = expected_;
  for (auto& n : store_.nodes()) {
    if (std::find(nodes.begin(), nodes.end(), n) == nodes.end()) nodes.push_back(std::move(n));
  }
  for (const auto& node : nodes) offer(check_stale(store_, node, now, cfg_, since_));

  offer(check_delay(store_, now, cfg_));

  for (const auto& node : nodes) {
    auto fix = latest_fix(store_, node);
    if (!fix) continue;
    auto it = last_fix_.find(node);
    if (it == last_fix_.end()) {
      last_fix_.emplace(node, *fix);
      continue;
    }
    if (fix->seq == it->second.seq) continue;
    if (auto a = check_gps(it->second, *fix, cfg_)) {
      a->detected_at = now;
      offer(std::move(a));
    }
    it->second = *fix;
  }

  for (const auto& r : store_.received_between(extremes_cursor_.value_or(kBeginning), now)) {
    offer(check_extremes(r, cfg_));
  }
  extremes_cursor_ = now;

  return raised;
}

}  // namespace agrimon
