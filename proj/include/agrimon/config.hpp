#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "agrimon/core.hpp"

namespace agrimon {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DetectorConfig {
  double window_s = 40;
  double history_s = 160;
  double rise_threshold = 0.10;
  double drop_threshold = 0.04;
  double stale_timeout_s = 60;
  double delay_threshold_s = 30;
  int delay_min_count = 5;
  double gps_interval_s = 20;
  double gps_displacement_m = 50;
  double temp_max = 40;
  double temp_min = 0;
  double hum_max = 95;
  double hum_min = 20;
  int malformed_burst_count = 50;
  double malformed_burst_window_s = 10;
  double alert_cooldown_s = 30;

  Duration window() const { return seconds_to_duration(window_s); }
  Duration history() const { return seconds_to_duration(history_s); }
  Duration stale_timeout() const { return seconds_to_duration(stale_timeout_s); }
  Duration delay_threshold() const { return seconds_to_duration(delay_threshold_s); }
  Duration malformed_burst_window() const { return seconds_to_duration(malformed_burst_window_s); }
  Duration alert_cooldown() const { return seconds_to_duration(alert_cooldown_s); }

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;

  /// Assigns a field by its name; returns false for unknown keys.
  /// Throws ConfigError when the value does not parse.
  bool set(std::string_view key, std::string_view value);

  static const std::vector<std::string_view>& keys();
  bool operator==(const DetectorConfig&) const = default;
};

/// One `[type name]` block of a sectioned key = value file. `name` is empty
/// for a bare `[type]` header.
struct Section {
  std::string type;
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;
};

std::vector<Section> parse_sections(std::string_view text);
std::vector<Section> load_sections(const std::filesystem::path& path);

double parse_number(std::string_view key, std::string_view value);
std::int64_t parse_integer(std::string_view key, std::string_view value);

}  // namespace agrimon
