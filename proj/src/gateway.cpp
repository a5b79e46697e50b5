#include "agrimon/gateway.hpp"

#include "agrimon/payload.hpp"

namespace agrimon {

void Whitelist::add(std::string address, std::string node_id) {
  if (node_id.empty()) node_id = address;
  allowed_.insert_or_assign(std::move(address), std::move(node_id));
}

bool Whitelist::remove(std::string_view address) {
  auto it = allowed_.find(address);
  if (it == allowed_.end()) return false;
  allowed_.erase(it);
  return true;
}

AdmissionResult screen(const RawPacket& packet, const Whitelist& whitelist) {
  AdmissionResult out;
  if (!whitelist.contains(packet.source_address)) {
    out.rejected = RejectionReason::UnauthorizedSource;
    out.detail = "source not whitelisted";
    return out;
  }
  auto parsed = parse_payload(packet.payload);
  if (!parsed) {
    out.rejected = to_rejection(parsed.error().reason);
    out.detail = parsed.error().detail;
    return out;
  }
  for (const auto& fv : parsed.value().values) {
    if (auto st = validate_range(fv.field, fv.value); !st) {
      out.rejected = RejectionReason::OutOfRange;
      out.detail = st.error().detail;
      return out;
    }
  }
  const Timestamp sampled = parsed.value().sampled_at.value_or(packet.sent_at);
  const std::string& node = whitelist.node_for(packet.source_address);
  out.readings.reserve(parsed.value().values.size());
  for (const auto& fv : parsed.value().values) {
    out.readings.push_back(
        SensorReading{node, fv.field, fv.value, sampled, packet.arrived_at, 0});
  }
  return out;
}

std::optional<AlertEvent> MalformedTracker::record(Timestamp at) {
  recent_.push_back(at);
  const Timestamp horizon = at - cfg_.malformed_burst_window();
  while (!recent_.empty() && recent_.front() <= horizon) recent_.pop_front();
  if (recent_.size() < static_cast<std::size_t>(cfg_.malformed_burst_count)) return std::nullopt;
  if (last_alert_ && at - *last_alert_ < cfg_.alert_cooldown()) return std::nullopt;
  last_alert_ = at;
  AlertEvent a;
  a.kind = AlertKind::MalformedBurst;
  a.detected_at = at;
  a.window_start = recent_.front();
  a.window_end = at;
  a.value = static_cast<double>(recent_.size());
  a.evidence = std::to_string(recent_.size()) + " malformed packets within " +
               format_value(cfg_.malformed_burst_window_s) + " s";
  return a;
}

std::optional<AlertEvent> track_malformed(std::span<const Timestamp> rejections,
                                          const DetectorConfig& cfg) {
  MalformedTracker tracker(cfg);
  for (auto t : rejections) {
    if (auto a = tracker.record(t)) return a;
  }
  return std::nullopt;
}

Gateway::Gateway(Store& store, Whitelist whitelist, const DetectorConfig& cfg)
    : store_(store), whitelist_(std::move(whitelist)), cfg_(cfg), malformed_(cfg) {}

AdmissionResult Gateway::admit(const RawPacket& packet) {
  std::lock_guard lock(mutex_);
  AdmissionResult result = screen(packet, whitelist_);
  if (!result.admitted()) {
    const RejectionReason reason = *result.rejected;
    store_.append_rejection({packet.arrived_at, packet.source_address, reason, result.detail});
    ++stats_.rejected[reason];
    if (reason == RejectionReason::UnauthorizedSource) {
      ++stats_.unauthorized;
      auto it = last_unauthorized_alert_.find(packet.source_address);
      if (it == last_unauthorized_alert_.end() ||
          packet.arrived_at - it->second >= cfg_.alert_cooldown()) {
        last_unauthorized_alert_.insert_or_assign(packet.source_address, packet.arrived_at);
        AlertEvent a;
        a.kind = AlertKind::UnauthorizedSource;
        a.node_id = packet.source_address;
        a.detected_at = packet.arrived_at;
        a.evidence = "rejected packet from non-whitelisted source " + packet.source_address;
        pending_.push_back(std::move(a));
      }
    } else if (auto a = malformed_.record(packet.arrived_at)) {
      pending_.push_back(std::move(*a));
    }
    return result;
  }
  for (auto& r : result.readings) r.seq = store_.append_reading(r);
  ++stats_.admitted_packets;
  stats_.admitted_readings += result.readings.size();
  return result;
}

std::vector<AlertEvent> Gateway::take_alerts() {
  std::lock_guard lock(mutex_);
  return std::exchange(pending_, {});
}

void Gateway::allow(std::string address, std::string node_id) {
  std::lock_guard lock(mutex_);
  whitelist_.add(std::move(address), std::move(node_id));
}

bool Gateway::revoke(std::string_view address) {
  std::lock_guard lock(mutex_);
  return whitelist_.remove(address);
}

Whitelist Gateway::whitelist() const {
  std::lock_guard lock(mutex_);
  return whitelist_;
}

GatewayStats Gateway::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

}  // namespace agrimon
