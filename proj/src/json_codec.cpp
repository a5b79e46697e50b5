#include "agrimon/json_codec.hpp"

#include <stdexcept>

namespace agrimon {
namespace {

Json optional_ts(const std::optional<Timestamp>& t) {
  return t ? Json(t->millis()) : Json(nullptr);
}

std::optional<Timestamp> read_optional_ts(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return Timestamp(j.at(key).get<std::int64_t>());
}

}  // namespace

Json to_json(const SensorReading& r) {
  return Json{{"seq", r.seq},
              {"node_id", r.node_id},
              {"field", field_name(r.field)},
              {"value", r.value},
              {"sampled_at", r.sampled_at.millis()},
              {"received_at", r.received_at.millis()}};
}

SensorReading reading_from_json(const Json& j) {
  SensorReading r;
  r.seq = j.at("seq").get<Seq>();
  r.node_id = j.at("node_id").get<std::string>();
  auto field = field_from_name(j.at("field").get<std::string>());
  if (!field) throw std::invalid_argument("unknown field");
  r.field = *field;
  r.value = j.at("value").get<double>();
  r.sampled_at = Timestamp(j.at("sampled_at").get<std::int64_t>());
  r.received_at = Timestamp(j.at("received_at").get<std::int64_t>());
  return r;
}

Json to_json(const AlertEvent& a) {
  return Json{{"alert_id", a.alert_id},
              {"kind", alert_kind_name(a.kind)},
              {"node_id", a.node_id ? Json(*a.node_id) : Json(nullptr)},
              {"detected_at", a.detected_at.millis()},
              {"window_start", optional_ts(a.window_start)},
              {"window_end", optional_ts(a.window_end)},
              {"evidence", a.evidence},
              {"value", a.value ? Json(*a.value) : Json(nullptr)}};
}

AlertEvent alert_from_json(const Json& j) {
  AlertEvent a;
  a.alert_id = j.at("alert_id").get<std::uint64_t>();
  auto kind = alert_kind_from_name(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown alert kind");
  a.kind = *kind;
  if (!j.at("node_id").is_null()) a.node_id = j.at("node_id").get<std::string>();
  a.detected_at = Timestamp(j.at("detected_at").get<std::int64_t>());
  a.window_start = read_optional_ts(j, "window_start");
  a.window_end = read_optional_ts(j, "window_end");
  a.evidence = j.at("evidence").get<std::string>();
  if (j.contains("value") && !j.at("value").is_null()) a.value = j.at("value").get<double>();
  return a;
}

Json to_json(const Rejection& r) {
  return Json{{"at", r.at.millis()},
              {"source_address", r.source_address},
              {"reason", rejection_name(r.reason)},
              {"detail", r.detail}};
}

Rejection rejection_from_json(const Json& j) {
  Rejection r;
  r.at = Timestamp(j.at("at").get<std::int64_t>());
  r.source_address = j.at("source_address").get<std::string>();
  auto reason = rejection_from_name(j.at("reason").get<std::string>());
  if (!reason) throw std::invalid_argument("unknown rejection reason");
  r.reason = *reason;
  r.detail = j.at("detail").get<std::string>();
  return r;
}

}  // namespace agrimon
