#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agrimon/config.hpp"
#include "agrimon/core.hpp"
#include "agrimon/store.hpp"

namespace agrimon {

/// Arrival-volume snapshot. `recent` covers [now - window, now), `prior`
/// covers [now - 2*window, now - window), `trend` holds one count per second
/// over [now - history, now), oldest first.
struct WindowStats {
  Timestamp now;
  std::size_t recent_count = 0;
  std::size_t prior_count = 0;
  /// (recent - prior) / prior; absent when prior is zero.
  std::optional<double> rate_of_change;
  std::vector<std::size_t> trend;
  /// Everything received before `now`.
  std::size_t total = 0;

  static WindowStats from_counts(std::size_t recent, std::size_t prior, Timestamp now = {});
};

WindowStats window_stats(const Store& store, Timestamp now, const DetectorConfig& cfg);
/// Per-node variant, read-only; the volume rule itself runs on global stats.
WindowStats window_stats(const Store& store, std::string_view node_id, Timestamp now,
                         const DetectorConfig& cfg);

/// FloodingSuspected when rate >= rise_threshold, DataLossSuspected when
/// rate <= -drop_threshold, nothing inside the dead band or when undefined.
std::optional<AlertEvent> check_volume(const WindowStats& stats, const DetectorConfig& cfg);

/// StaleData once a node has been silent for longer than stale_timeout.
/// A node that never reported is held to the same limit counted from
/// `monitoring_since`.
std::optional<AlertEvent> check_stale(const Store& store, std::string_view node_id, Timestamp now,
                                      const DetectorConfig& cfg, Timestamp monitoring_since);

/// DataDelay when at least delay_min_count readings received in
/// [now - window, now) arrived more than delay_threshold after their claimed
/// sample time.
std::optional<AlertEvent> check_delay(const Store& store, Timestamp now, const DetectorConfig& cfg);

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

inline constexpr double kEarthRadiusM = 6371000.0;

/// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
double haversine_m(GeoPoint a, GeoPoint b);

struct GpsFix {
  std::string node_id;
  GeoPoint position;
  Timestamp at;
  Seq seq = 0;  // of the latitude reading; orders fixes by arrival
};

/// Latest fix of a node, assembled from its most recent latitude and longitude readings.
std::optional<GpsFix> latest_fix(const Store& store, std::string_view node_id);

std::optional<AlertEvent> check_gps(const GpsFix& previous, const GpsFix& current,
                                    const DetectorConfig& cfg);

std::optional<AlertEvent> check_extremes(const SensorReading& r, const DetectorConfig& cfg);

/// Runs every rule on a schedule, suppresses repeats of the same (kind, node)
/// within alert_cooldown, and persists what survives.
///
/// Volume rules engage only once the prior window lies entirely inside the
/// monitoring period; before that the comparison is against a partially
/// observed baseline.
class Detector {
 public:
  Detector(Store& store, const DetectorConfig& cfg, std::vector<std::string> expected_nodes,
           Timestamp monitoring_since);

  std::vector<AlertEvent> evaluate(Timestamp now);

  /// Applies cooldown dedup and persists. Returns the stored alert, or
  /// nothing when it was suppressed.
  std::optional<AlertEvent> submit(AlertEvent alert);

  const DetectorConfig& config() const { return cfg_; }
  Timestamp monitoring_since() const { return since_; }

 private:
  using CooldownKey = std::pair<AlertKind, std::optional<std::string>>;

  Store& store_;
  DetectorConfig cfg_;
  std::vector<std::string> expected_;
  Timestamp since_;
  std::optional<Timestamp> extremes_cursor_;
  std::map<std::string, GpsFix, std::less<>> last_fix_;
  std::map<CooldownKey, Timestamp> last_raised_;
};

}  // namespace agrimon
