#pragma once

#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agrimon/config.hpp"
#include "agrimon/core.hpp"
#include "agrimon/store.hpp"

namespace agrimon {

/// Sender addresses the gateway accepts, each bound to the node identity its
/// readings are filed under (the address itself unless given).
class Whitelist {
 public:
  Whitelist() = default;
  Whitelist(std::initializer_list<std::string> addresses) {
    for (const auto& a : addresses) add(a);
  }

  bool contains(std::string_view address) const { return allowed_.find(address) != allowed_.end(); }
  /// Precondition: contains(address).
  const std::string& node_for(std::string_view address) const { return allowed_.find(address)->second; }
  void add(std::string address, std::string node_id = {});
  bool remove(std::string_view address);
  const std::map<std::string, std::string, std::less<>>& entries() const { return allowed_; }

 private:
  std::map<std::string, std::string, std::less<>> allowed_;
};

/// Exactly one of `readings` (admitted) or `rejected` is meaningful.
struct AdmissionResult {
  std::vector<SensorReading> readings;
  std::optional<RejectionReason> rejected;
  std::string detail;

  bool admitted() const { return !rejected.has_value(); }
};

/// Stateless filter: whitelist, then grammar, then ranges. Readings carry
/// received_at = packet.arrived_at and seq = 0.
AdmissionResult screen(const RawPacket& packet, const Whitelist& whitelist);

/// Sliding count of format rejections. Raises MalformedBurst once
/// `malformed_burst_count` rejections fall within a span shorter than
/// `malformed_burst_window_s`, then stays quiet for one cooldown.
class MalformedTracker {
 public:
  explicit MalformedTracker(const DetectorConfig& cfg) : cfg_(cfg) {}

  /// Timestamps must be non-decreasing.
  std::optional<AlertEvent> record(Timestamp at);

 private:
  DetectorConfig cfg_;
  std::deque<Timestamp> recent_;
  std::optional<Timestamp> last_alert_;
};

/// Batch form over a full rejection log; returns the first alert raised.
std::optional<AlertEvent> track_malformed(std::span<const Timestamp> rejections,
                                          const DetectorConfig& cfg);

struct GatewayStats {
  std::uint64_t admitted_packets = 0;
  std::uint64_t admitted_readings = 0;
  std::uint64_t unauthorized = 0;
  std::map<RejectionReason, std::uint64_t> rejected;
};

/// Ingestion front door bound to a store. Admitted readings are appended with
/// fresh serial numbers; every rejection is logged. Calls are serialized.
class Gateway {
 public:
  Gateway(Store& store, Whitelist whitelist, const DetectorConfig& cfg);

  AdmissionResult admit(const RawPacket& packet);

  /// Alerts raised by admission since the last call.
  std::vector<AlertEvent> take_alerts();

  void allow(std::string address, std::string node_id = {});
  bool revoke(std::string_view address);
  Whitelist whitelist() const;
  GatewayStats stats() const;

 private:
  mutable std::mutex mutex_;
  Store& store_;
  Whitelist whitelist_;
  DetectorConfig cfg_;
  MalformedTracker malformed_;
  std::map<std::string, Timestamp, std::less<>> last_unauthorized_alert_;
  std::vector<AlertEvent> pending_;
  GatewayStats stats_;
};

}  // namespace agrimon
