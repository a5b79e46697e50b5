#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "agrimon/core.hpp"

namespace agrimon {

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Append-only persistence for readings, alerts and rejections.
///
/// On disk a store is a directory holding `readings.log`, `alerts.log` and
/// `rejections.log`, one JSON object per LF-terminated line. Opening a store
/// rescans the logs and rebuilds the in-memory indices; an unterminated final
/// line (a torn write) is dropped and truncated away, while a corrupt line
/// anywhere else is reported as StoreError.
///
/// One writer at a time; any number of concurrent readers. Each query sees
/// the state as of its start. All intervals are half-open: [t0, t1).
class Store {
 public:
  /// Memory-only store; nothing is written to disk.
  Store();
  enum class Mode { ReadWrite, ReadOnly };

  /// Opens (creating if necessary) a store rooted at `data_dir`. A read-only
  /// store loads the logs without repairing them and rejects appends.
  explicit Store(const std::filesystem::path& data_dir, Mode mode = Mode::ReadWrite);
  ~Store();
  Store(Store&&) noexcept;
  Store& operator=(Store&&) noexcept;

  const std::optional<std::filesystem::path>& data_dir() const;

  /// Assigns the next serial number (the incoming seq is ignored) and returns it.
  Seq append_reading(const SensorReading& r);
  std::uint64_t append_alert(const AlertEvent& a);
  void append_rejection(const Rejection& r);

  /// Readings of one series with t0 <= sampled_at < t1, ordered by (sampled_at, seq).
  std::vector<SensorReading> query_range(std::string_view node_id, Field field, Timestamp t0,
                                         Timestamp t1) const;
  /// Readings with t0 <= received_at < t1 across all nodes.
  std::size_t count_received(Timestamp t0, Timestamp t1) const;
  std::size_t count_received(std::string_view node_id, Timestamp t0, Timestamp t1) const;
  /// Readings with t0 <= received_at < t1, ordered by (received_at, seq).
  std::vector<SensorReading> received_between(Timestamp t0, Timestamp t1) const;

  /// Alerts with t0 <= detected_at < t1, ordered by alert_id.
  std::vector<AlertEvent> query_alerts(Timestamp t0, Timestamp t1,
                                       std::optional<AlertKind> kind = std::nullopt) const;
  std::vector<Rejection> query_rejections(Timestamp t0, Timestamp t1) const;

  /// Most recently stored reading (highest seq) of a series.
  std::optional<SensorReading> latest(std::string_view node_id, Field field) const;
  std::optional<Timestamp> last_received(std::string_view node_id) const;
  std::vector<std::string> nodes() const;

  std::vector<SensorReading> all_readings() const;
  std::size_t reading_count() const;
  std::size_t alert_count() const;
  std::size_t rejection_count() const;
  Seq next_seq() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace agrimon
