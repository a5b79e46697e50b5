#include "agrimon/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace agrimon {

double parse_number(std::string_view key, std::string_view value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size() ||
      !std::isfinite(out)) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(value) + "'");
  }
  return out;
}

std::int64_t parse_integer(std::string_view key, std::string_view value) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(value) +
                      "'");
  }
  return out;
}

const std::vector<std::string_view>& DetectorConfig::keys() {
  static const std::vector<std::string_view> k = {
      "window_s",           "history_s",         "rise_threshold",   "drop_threshold",
      "stale_timeout_s",    "delay_threshold_s", "delay_min_count",  "gps_interval_s",
      "gps_displacement_m", "temp_max",          "temp_min",         "hum_max",
      "hum_min",            "malformed_burst_count", "malformed_burst_window_s",
      "alert_cooldown_s"};
  return k;
}

bool DetectorConfig::set(std::string_view key, std::string_view value) {
  auto num = [&](double& slot) {
    slot = parse_number(key, value);
    return true;
  };
  auto integer = [&](int& slot) {
    slot = static_cast<int>(parse_integer(key, value));
    return true;
  };
  if (key == "window_s") return num(window_s);
  if (key == "history_s") return num(history_s);
  if (key == "rise_threshold") return num(rise_threshold);
  if (key == "drop_threshold") return num(drop_threshold);
  if (key == "stale_timeout_s") return num(stale_timeout_s);
  if (key == "delay_threshold_s") return num(delay_threshold_s);
  if (key == "delay_min_count") return integer(delay_min_count);
  if (key == "gps_interval_s") return num(gps_interval_s);
  if (key == "gps_displacement_m") return num(gps_displacement_m);
  if (key == "temp_max") return num(temp_max);
  if (key == "temp_min") return num(temp_min);
  if (key == "hum_max") return num(hum_max);
  if (key == "hum_min") return num(hum_min);
  if (key == "malformed_burst_count") return integer(malformed_burst_count);
  if (key == "malformed_burst_window_s") return num(malformed_burst_window_s);
  if (key == "alert_cooldown_s") return num(alert_cooldown_s);
  return false;
}

void DetectorConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0)) throw ConfigError(std::string(name) + " must be > 0");
  };
  positive(window_s, "window_s");
  positive(history_s, "history_s");
  positive(rise_threshold, "rise_threshold");
  positive(drop_threshold, "drop_threshold");
  positive(stale_timeout_s, "stale_timeout_s");
  positive(delay_threshold_s, "delay_threshold_s");
  positive(gps_interval_s, "gps_interval_s");
  positive(gps_displacement_m, "gps_displacement_m");
  positive(malformed_burst_window_s, "malformed_burst_window_s");
  positive(alert_cooldown_s, "alert_cooldown_s");
  if (delay_min_count < 1) throw ConfigError("delay_min_count must be >= 1");
  if (malformed_burst_count < 1) throw ConfigError("malformed_burst_count must be >= 1");
  if (history_s < 2 * window_s) throw ConfigError("history_s must be >= 2 * window_s");
  if (temp_min > temp_max) throw ConfigError("temp_min must not exceed temp_max");
  if (hum_min > hum_max) throw ConfigError("hum_min must not exceed hum_max");
  // The volume trend is reported at 1 s resolution.
  if (history().count() % 1000 != 0) throw ConfigError("history_s must be a whole number");
}

std::vector<Section> parse_sections(std::string_view text) {
  namespace pt = boost::property_tree;
  std::istringstream in{std::string(text)};
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }

  std::vector<Section> out;
  for (const auto& [header, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("key '" + header + "' appears outside any [section]");
    }
    Section s;
    auto space = header.find(' ');
    s.type = header.substr(0, space);
    if (space != std::string::npos) {
      s.name = header.substr(space + 1);
      auto first = s.name.find_first_not_of(' ');
      s.name = first == std::string::npos ? std::string() : s.name.substr(first);
    }
    for (const auto& [key, value] : body) s.entries.emplace_back(key, value.data());
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Section> load_sections(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_sections(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace agrimon
