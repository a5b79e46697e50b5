#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agrimon/clock.hpp"
#include "agrimon/config.hpp"
#include "agrimon/core.hpp"
#include "agrimon/rng.hpp"

namespace agrimon {

struct NodeProfile {
  std::string node_id = "node-1";
  std::string source_address = "10.0.0.1";
  double sample_period_s = 1;
  double gps_period_s = 20;
  double base_temp = 22.0;
  double base_hum = 55.0;
  double base_lat = -34.9285;
  double base_lon = 138.6007;
  /// Peak deviation of temperature/humidity from base; 0 means constant values.
  double jitter_amplitude = 0.0;
  /// Peak deviation of GPS fixes from base, in degrees.
  double gps_jitter_deg = 0.0;
  /// Each packet is delivered after a uniform latency in [0, transit_jitter_s).
  double transit_jitter_s = 0.0;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

/// A simulated sensor. Emission is driven by the clock; the same profile and
/// the same tick schedule always yield the same packets.
class SensorNode {
 public:
  SensorNode(NodeProfile profile, Timestamp first_slot = Timestamp(0));

  const NodeProfile& profile() const { return profile_; }

  /// Emits every packet whose slot time is at or before clock.now(), in slot
  /// order. Temperature/humidity share one packet per sample period; latitude
  /// and longitude travel in a separate packet per GPS period.
  std::vector<RawPacket> emit(const Clock& clock);

 private:
  RawPacket make_packet(std::string payload, Timestamp at);
  double jittered(double base, double amplitude, Field field);

  NodeProfile profile_;
  Rng values_;
  Rng transit_;
  Timestamp next_sample_;
  Timestamp next_gps_;
};

enum class AttackKind {
  Flooding,
  SelectiveForwarding,
  BlackHole,
  Sinkhole,
  Misdirection,
  DelaySkew,
  GpsTamper,
  MalformedStorm,
  UnauthorizedSender,
};

std::string_view attack_kind_name(AttackKind k);
std::optional<AttackKind> attack_kind_from_name(std::string_view name);

struct AttackScenario {
  std::string name;
  AttackKind kind = AttackKind::Flooding;
  /// Source address the attack applies to; empty means every source.
  std::string target;
  Timestamp start_at;
  Timestamp end_at;
  /// flood_multiplier, drop_probability, delay_skew_s, lat_jump, lon_jump,
  /// malformed_fraction.
  std::map<std::string, double, std::less<>> params;

  double param(std::string_view key, double fallback) const;
  bool active_at(Timestamp t) const { return t >= start_at && t < end_at; }
  bool applies_to(const RawPacket& p) const {
    return active_at(p.sent_at) && (target.empty() || target == p.source_address);
  }

  /// Throws ConfigError when the scenario's invariants do not hold.
  void validate() const;
};

/// Transforms a packet stream according to the active scenarios, applied in
/// list order. A packet is inside a window when its sent_at is. Packets
/// outside every window pass through unchanged.
std::vector<RawPacket> apply_attacks(std::vector<RawPacket> packets,
                                     std::span<const AttackScenario> scenarios, Rng& rng);

/// Reads `[scenario <name>]` sections: kind, start_s, end_s, optional target,
/// plus any numeric params. Times are offsets in seconds from `origin`.
std::vector<AttackScenario> scenarios_from_sections(std::span<const Section> sections,
                                                    Timestamp origin = Timestamp(0));

}  // namespace agrimon
