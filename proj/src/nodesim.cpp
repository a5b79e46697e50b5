#include "agrimon/nodesim.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "agrimon/payload.hpp"

namespace agrimon {
namespace {

constexpr std::array<std::string_view, 9> kAttackNames = {
    "Flooding",  "SelectiveForwarding", "BlackHole",      "Sinkhole",          "Misdirection",
    "DelaySkew", "GpsTamper",           "MalformedStorm", "UnauthorizedSender"};

double round_to(double v, double step) { return std::round(v / step) * step; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// Calls fn(name, value_text, line) for each line and rebuilds the payload from
// whatever fn returns. Lines without a colon are passed through untouched.
template <class Fn>
std::string rewrite_lines(std::string_view payload, Fn fn) {
  std::string out;
  std::size_t pos = 0;
  while (pos < payload.size()) {
    auto end = payload.find('\n', pos);
    bool terminated = end != std::string_view::npos;
    if (!terminated) end = payload.size();
    std::string_view line = payload.substr(pos, end - pos);
    pos = terminated ? end + 1 : end;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      out += line;
    } else {
      out += fn(lower(trim(line.substr(0, colon))), trim(line.substr(colon + 1)), line);
    }
    if (terminated) out += '\n';
  }
  return out;
}

std::string garbage(Rng& rng) {
  static constexpr std::string_view kAlphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789 #$%&*+-./;<=>?@_~";
  std::string out(8 + rng.below(25), ' ');
  for (auto& c : out) c = kAlphabet[rng.below(kAlphabet.size())];
  return out;
}

std::string skew_sample_time(const RawPacket& p, Duration skew) {
  auto skewed = [&](Timestamp claimed) {
    return std::to_string(std::max<std::int64_t>(0, (claimed - skew).millis()));
  };
  bool found = false;
  std::string out = rewrite_lines(p.payload, [&](const std::string& name, std::string_view value,
                                                  std::string_view line) -> std::string {
    if (name != kSampledAtKey) return std::string(line);
    found = true;
    std::int64_t ms = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), ms);
    bool valid = ec == std::errc{} && ptr == value.data() + value.size() && ms >= 0;
    return std::string(kSampledAtKey) + ": " + skewed(valid ? Timestamp(ms) : p.sent_at);
  });
  if (!found) {
    if (!out.empty() && out.back() != '\n') out += '\n';
    out += std::string(kSampledAtKey) + ": " + skewed(p.sent_at) + "\n";
  }
  return out;
}

std::string shift_gps(const RawPacket& p, double lat_jump, double lon_jump) {
  return rewrite_lines(p.payload, [&](const std::string& name, std::string_view value,
                                      std::string_view line) -> std::string {
    double jump = name == "latitude" ? lat_jump : name == "longitude" ? lon_jump : 0.0;
    if (jump == 0.0) return std::string(line);
    auto parsed = parse_payload(std::string(name) + ": " + std::string(value));
    if (!parsed) return std::string(line);
    return std::string(name) + ": " + format_value(parsed.value().values.front().value + jump);
  });
}

}  // namespace

std::string_view attack_kind_name(AttackKind k) {
  return kAttackNames[static_cast<std::size_t>(k)];
}

std::optional<AttackKind> attack_kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kAttackNames.size(); ++i) {
    if (lower(name) == lower(kAttackNames[i])) return static_cast<AttackKind>(i);
  }
  return std::nullopt;
}

void NodeProfile::validate() const {
  if (node_id.empty()) throw ConfigError("node_id must not be empty");
  if (!(sample_period_s > 0)) throw ConfigError(node_id + ": sample_period_s must be > 0");
  if (!(gps_period_s > 0)) throw ConfigError(node_id + ": gps_period_s must be > 0");
  if (jitter_amplitude < 0 || gps_jitter_deg < 0 || transit_jitter_s < 0)
    throw ConfigError(node_id + ": jitter values must be >= 0");
  if (transit_jitter_s >= sample_period_s)
    throw ConfigError(node_id + ": transit_jitter_s must be below sample_period_s");
}

SensorNode::SensorNode(NodeProfile profile, Timestamp first_slot)
    : profile_(std::move(profile)),
      values_(derive_seed(profile_.rng_seed, 0)),
      transit_(derive_seed(profile_.rng_seed, 1)),
      next_sample_(first_slot),
      next_gps_(first_slot) {
  profile_.validate();
}

double SensorNode::jittered(double base, double amplitude, Field field) {
  double v = base;
  if (amplitude > 0) v += amplitude * values_.symmetric();
  auto [lo, hi] = field_range(field);
  return std::clamp(v, lo, hi);
}

RawPacket SensorNode::make_packet(std::string payload, Timestamp at) {
  Timestamp arrival = at;
  if (profile_.transit_jitter_s > 0) {
    arrival = at + seconds_to_duration(profile_.transit_jitter_s * transit_.uniform());
  }
  return RawPacket{profile_.source_address, std::move(payload), at, arrival};
}

std::vector<RawPacket> SensorNode::emit(const Clock& clock) {
  const Timestamp now = clock.now();
  const Duration sample_period = seconds_to_duration(profile_.sample_period_s);
  const Duration gps_period = seconds_to_duration(profile_.gps_period_s);
  std::vector<RawPacket> out;
  while (next_sample_ <= now || next_gps_ <= now) {
    if (next_sample_ <= next_gps_) {
      FieldValue values[] = {
          {Field::Temperature,
           round_to(jittered(profile_.base_temp, profile_.jitter_amplitude, Field::Temperature), 0.01)},
          {Field::Humidity,
           round_to(jittered(profile_.base_hum, profile_.jitter_amplitude, Field::Humidity), 0.01)},
      };
      out.push_back(make_packet(format_payload(values), next_sample_));
      next_sample_ += sample_period;
    } else {
      FieldValue values[] = {
          {Field::Latitude,
           round_to(jittered(profile_.base_lat, profile_.gps_jitter_deg, Field::Latitude), 1e-6)},
          {Field::Longitude,
           round_to(jittered(profile_.base_lon, profile_.gps_jitter_deg, Field::Longitude), 1e-6)},
      };
      out.push_back(make_packet(format_payload(values), next_gps_));
      next_gps_ += gps_period;
    }
  }
  return out;
}

double AttackScenario::param(std::string_view key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void AttackScenario::validate() const {
  const std::string who = name.empty() ? std::string(attack_kind_name(kind)) : name;
  if (!(start_at < end_at)) throw ConfigError(who + ": start must precede end");
  if (start_at.millis() < 0) throw ConfigError(who + ": start must be non-negative");
  double p = param("drop_probability", 0.0);
  if (p < 0 || p > 1) throw ConfigError(who + ": drop_probability must lie in [0, 1]");
  double f = param("malformed_fraction", 0.0);
  if (f < 0 || f > 1) throw ConfigError(who + ": malformed_fraction must lie in [0, 1]");
  if (param("flood_multiplier", 1.0) < 1) throw ConfigError(who + ": flood_multiplier must be >= 1");
  if (param("delay_skew_s", 0.0) < 0) throw ConfigError(who + ": delay_skew_s must be >= 0");
}

std::vector<RawPacket> apply_attacks(std::vector<RawPacket> packets,
                                     std::span<const AttackScenario> scenarios, Rng& rng) {
  for (const auto& sc : scenarios) {
    std::vector<RawPacket> next;
    next.reserve(packets.size());
    for (auto& p : packets) {
      if (!sc.applies_to(p)) {
        next.push_back(std::move(p));
        continue;
      }
      switch (sc.kind) {
        case AttackKind::Flooding: {
          auto copies = static_cast<std::size_t>(std::llround(sc.param("flood_multiplier", 10.0)));
          auto junk = static_cast<std::size_t>(
              std::llround(sc.param("junk_per_packet", static_cast<double>(copies))));
          for (std::size_t i = 0; i < copies; ++i) next.push_back(p);
          for (std::size_t i = 0; i < junk; ++i) {
            RawPacket broadcast = p;
            broadcast.payload = i % 2 == 0 ? std::string() : garbage(rng);
            next.push_back(std::move(broadcast));
          }
          break;
        }
        case AttackKind::SelectiveForwarding:
          if (!rng.bernoulli(sc.param("drop_probability", 0.5))) next.push_back(std::move(p));
          break;
        case AttackKind::BlackHole:
        case AttackKind::Sinkhole:
        case AttackKind::Misdirection:
          break;
        case AttackKind::DelaySkew:
          p.payload = skew_sample_time(p, seconds_to_duration(sc.param("delay_skew_s", 60.0)));
          next.push_back(std::move(p));
          break;
        case AttackKind::GpsTamper:
          p.payload = shift_gps(p, sc.param("lat_jump", 0.01), sc.param("lon_jump", 0.0));
          next.push_back(std::move(p));
          break;
        case AttackKind::MalformedStorm:
          if (rng.bernoulli(sc.param("malformed_fraction", 1.0))) p.payload = garbage(rng);
          next.push_back(std::move(p));
          break;
        case AttackKind::UnauthorizedSender:
          p.source_address = "rogue-" + p.source_address;
          next.push_back(std::move(p));
          break;
      }
    }
    packets = std::move(next);
  }
  return packets;
}

std::vector<AttackScenario> scenarios_from_sections(std::span<const Section> sections,
                                                    Timestamp origin) {
  std::vector<AttackScenario> out;
  for (const auto& s : sections) {
    if (s.type != "scenario") continue;
    AttackScenario sc;
    sc.name = s.name;
    bool have_kind = false, have_start = false, have_end = false;
    for (const auto& [key, value] : s.entries) {
      if (key == "kind") {
        auto k = attack_kind_from_name(value);
        if (!k) throw ConfigError("scenario " + s.name + ": unknown kind '" + value + "'");
        sc.kind = *k;
        have_kind = true;
      } else if (key == "start_s") {
        sc.start_at = origin + seconds_to_duration(parse_number(key, value));
        have_start = true;
      } else if (key == "end_s") {
        sc.end_at = origin + seconds_to_duration(parse_number(key, value));
        have_end = true;
      } else if (key == "target") {
        sc.target = value;
      } else {
        sc.params[key] = parse_number(key, value);
      }
    }
    if (!have_kind || !have_start || !have_end) {
      throw ConfigError("scenario " + s.name + ": kind, start_s and end_s are required");
    }
    sc.validate();
    out.push_back(std::move(sc));
  }
  return out;
}

}  // namespace agrimon
