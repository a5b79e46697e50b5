#include "agrimon/api.hpp"

#include <charconv>
#include <set>

#include "agrimon/analytics.hpp"
#include "agrimon/detect.hpp"
#include "httplib.h"

namespace agrimon {
namespace {

struct BadRequest {
  std::string message;
};

HttpResponse reply(int status, Json body) {
  body["schema_version"] = kApiSchemaVersion;
  return {status, std::move(body)};
}

HttpResponse error_reply(int status, std::string_view error, std::string_view message) {
  return reply(status, Json{{"error", error}, {"message", message}});
}

// Typed access to query parameters. Construction rejects anything not listed.
class Params {
 public:
  Params(const std::multimap<std::string, std::string>& raw, std::set<std::string_view> allowed)
      : raw_(raw) {
    for (const auto& [k, v] : raw) {
      if (!allowed.contains(k)) throw BadRequest{"unknown parameter '" + k + "'"};
      if (raw.count(k) > 1) throw BadRequest{"parameter '" + k + "' given more than once"};
    }
  }

  std::optional<std::string> get(const std::string& key) const {
    auto it = raw_.find(key);
    if (it == raw_.end()) return std::nullopt;
    return it->second;
  }

  std::string required(const std::string& key) const {
    auto v = get(key);
    if (!v || v->empty()) throw BadRequest{"missing parameter '" + key + "'"};
    return *v;
  }

  Field field() const {
    auto f = field_from_name(required("field"));
    if (!f) throw BadRequest{"unknown field"};
    return *f;
  }

  Timestamp date(const std::string& key) const {
    auto t = parse_iso_date(required(key));
    if (!t) throw BadRequest{"'" + key + "' must be an ISO date (YYYY-MM-DD)"};
    return *t;
  }

  std::optional<std::int64_t> integer(const std::string& key) const {
    auto v = get(key);
    if (!v) return std::nullopt;
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (v->empty() || ec != std::errc{} || ptr != v->data() + v->size()) {
      throw BadRequest{"'" + key + "' must be an integer"};
    }
    return out;
  }

 private:
  const std::multimap<std::string, std::string>& raw_;
};

Json bucket_json(const Bucket& b) {
  auto stat = [&](double v) { return b.gap() ? Json(nullptr) : Json(v); };
  return Json{{"start", b.start.millis()}, {"end", b.end.millis()}, {"count", b.count},
              {"gap", b.gap()},           {"avg", stat(b.avg)},     {"min", stat(b.min)},
              {"max", stat(b.max)}};
}

Json buckets_json(const std::vector<Bucket>& buckets) {
  Json out = Json::array();
  for (const auto& b : buckets) out.push_back(bucket_json(b));
  return out;
}

Json stats_json(const WindowStats& s, const DetectorConfig& cfg) {
  return Json{{"now", s.now.millis()},
              {"recent", s.recent_count},
              {"prior", s.prior_count},
              {"rate", s.rate_of_change ? Json(*s.rate_of_change) : Json(nullptr)},
              {"trend", s.trend},
              {"total", s.total},
              {"window_s", cfg.window_s},
              {"history_s", cfg.history_s},
              {"rise_threshold", cfg.rise_threshold},
              {"drop_threshold", cfg.drop_threshold}};
}

Json whitelist_json(const Whitelist& w) {
  Json out = Json::array();
  for (const auto& [address, node] : w.entries()) {
    out.push_back(Json{{"address", address}, {"node_id", node}});
  }
  return out;
}

}  // namespace

ApiService::ApiService(const Store& store, Gateway* gateway, const DetectorConfig& cfg,
                       const Clock& clock, ApiOptions options)
    : store_(store), gateway_(gateway), cfg_(cfg), clock_(clock), options_(options) {}

ApiService::~ApiService() { stop(); }

HttpResponse ApiService::handle(const HttpRequest& request) const {
  try {
    return route(request);
  } catch (const BadRequest& e) {
    return error_reply(400, "BadRequest", e.message);
  } catch (const RangeError& e) {
    return error_reply(400, "RangeError", e.what());
  } catch (const std::exception& e) {
    return error_reply(500, "InternalError", e.what());
  }
}

HttpResponse ApiService::route(const HttpRequest& req) const {
  const std::string& path = req.path;
  const Timestamp now = clock_.now();

  if (path == "/api/admin/whitelist") {
    if (req.method != "POST") return error_reply(405, "MethodNotAllowed", "use POST");
    if (!options_.admin_enabled) return error_reply(403, "Forbidden", "admin endpoint disabled");
    if (!gateway_) return error_reply(503, "Unavailable", "no gateway attached");
    Params(req.params, {});
    Json body = Json::parse(req.body, nullptr, false);
    if (!body.is_object()) throw BadRequest{"body must be a JSON object"};
    for (const auto& [k, v] : body.items()) {
      if (k != "address" && k != "action" && k != "node_id") throw BadRequest{"unknown key '" + k + "'"};
    }
    if (!body.contains("address") || !body["address"].is_string() ||
        body["address"].get<std::string>().empty()) {
      throw BadRequest{"'address' must be a non-empty string"};
    }
    const auto address = body["address"].get<std::string>();
    const auto action = body.value("action", std::string());
    if (action == "add") {
      std::string node = body.contains("node_id") && body["node_id"].is_string()
                             ? body["node_id"].get<std::string>()
                             : std::string();
      gateway_->allow(address, node);
    } else if (action == "remove") {
      gateway_->revoke(address);
    } else {
      throw BadRequest{"'action' must be \"add\" or \"remove\""};
    }
    return reply(200, Json{{"whitelist", whitelist_json(gateway_->whitelist())}});
  }

  static const std::set<std::string_view> kGetPaths = {
      "/api/realtime", "/api/volume", "/api/history",  "/api/compare",
      "/api/week",     "/api/alerts", "/api/position", "/api/gateway"};
  if (!kGetPaths.contains(path)) return error_reply(404, "NotFound", "no such endpoint");
  if (req.method != "GET") return error_reply(405, "MethodNotAllowed", "use GET");

  if (path == "/api/realtime") {
    Params p(req.params, {"node"});
    const auto node = p.required("node");
    Json latest = Json::object();
    for (Field f : kAllFields) {
      auto r = store_.latest(node, f);
      latest[std::string(field_name(f))] = r ? to_json(*r) : Json(nullptr);
    }
    Json advisories = Json::array();
    if (auto adv = watering_advice(store_, node, cfg_)) {
      advisories.push_back(Json{{"kind", adv->kind},
                                {"message", adv->message},
                                {"value", adv->value},
                                {"reading_at", adv->reading_at.millis()}});
    }
    return reply(200, Json{{"now", now.millis()},
                           {"node", node},
                           {"latest", latest},
                           {"advisories", advisories}});
  }

  if (path == "/api/volume") {
    Params p(req.params, {"node"});
    auto node = p.get("node");
    Json body = stats_json(node ? window_stats(store_, *node, now, cfg_) : window_stats(store_, now, cfg_), cfg_);
    body["node"] = node ? Json(*node) : Json(nullptr);
    return reply(200, std::move(body));
  }

  if (path == "/api/history") {
    Params p(req.params, {"node", "field", "day"});
    const auto node = p.required("node");
    const Field field = p.field();
    const Timestamp day = p.date("day");
    return reply(200, Json{{"node", node},
                           {"field", field_name(field)},
                           {"day", format_iso_date(day)},
                           {"buckets", buckets_json(history_day(store_, node, field, day))}});
  }

  if (path == "/api/compare") {
    Params p(req.params, {"node", "field", "day", "hour"});
    const auto node = p.required("node");
    const Field field = p.field();
    Timestamp start = p.date("day");
    Duration len = kDay, width = kHour;
    if (auto hour = p.integer("hour")) {
      if (*hour < 0 || *hour > 23) throw BadRequest{"'hour' must be in 0..23"};
      start += std::chrono::hours(*hour);
      len = kHour;
      width = std::chrono::minutes(5);
    }
    auto cmp = compare_previous_day(store_, node, field, start, len, width);
    return reply(200, Json{{"node", node},
                           {"field", field_name(field)},
                           {"period_start", start.millis()},
                           {"period_len_ms", len.count()},
                           {"bucket_ms", width.count()},
                           {"current", buckets_json(cmp.current)},
                           {"previous", buckets_json(cmp.previous)}});
  }

  if (path == "/api/week") {
    Params p(req.params, {"node", "field", "start"});
    const auto node = p.required("node");
    const Field field = p.field();
    const Timestamp start = p.date("start");
    Json days = Json::array();
    for (const auto& d : query_week(store_, node, field, start, now)) {
      days.push_back(Json{{"day", format_iso_date(d.day_start)},
                          {"day_start", d.day_start.millis()},
                          {"count", d.count},
                          {"gap", d.gap()},
                          {"high", d.gap() ? Json(nullptr) : Json(d.high)},
                          {"low", d.gap() ? Json(nullptr) : Json(d.low)}});
    }
    return reply(200, Json{{"node", node}, {"field", field_name(field)}, {"days", days}});
  }

  if (path == "/api/alerts") {
    Params p(req.params, {"since", "kind"});
    const Timestamp since(p.integer("since").value_or(0));
    std::optional<AlertKind> kind;
    if (auto k = p.get("kind")) {
      kind = alert_kind_from_name(*k);
      if (!kind) throw BadRequest{"unknown alert kind '" + *k + "'"};
    }
    auto alerts = store_.query_alerts(since, Timestamp(std::numeric_limits<std::int64_t>::max()), kind);
    Json list = Json::array();
    for (auto it = alerts.rbegin(); it != alerts.rend(); ++it) list.push_back(to_json(*it));
    return reply(200, Json{{"now", now.millis()}, {"alerts", list}});
  }

  if (path == "/api/position") {
    Params p(req.params, {"node"});
    const auto node = p.required("node");
    Json fix = nullptr;
    if (auto f = latest_fix(store_, node)) {
      fix = Json{{"node_id", f->node_id},
                 {"lat", f->position.lat},
                 {"lon", f->position.lon},
                 {"at", f->at.millis()},
                 {"age_ms", (now - f->at).count()}};
    }
    return reply(200, Json{{"now", now.millis()}, {"node", node}, {"fix", fix}});
  }

  // /api/gateway
  Params(req.params, {});
  Json body{{"readings", store_.reading_count()},
            {"rejections", store_.rejection_count()},
            {"alerts", store_.alert_count()}};
  if (gateway_) {
    auto stats = gateway_->stats();
    Json rejected = Json::object();
    for (const auto& [reason, n] : stats.rejected) rejected[std::string(rejection_name(reason))] = n;
    body["admitted_packets"] = stats.admitted_packets;
    body["admitted_readings"] = stats.admitted_readings;
    body["unauthorized"] = stats.unauthorized;
    body["rejected"] = rejected;
    body["whitelist"] = whitelist_json(gateway_->whitelist());
  }
  return reply(200, std::move(body));
}

void ApiService::install_handlers() {
  server_ = std::make_unique<httplib::Server>();
  auto bridge = [this](const httplib::Request& in, httplib::Response& out) {
    HttpRequest req;
    req.method = in.method;
    req.path = in.path;
    for (const auto& [k, v] : in.params) req.params.emplace(k, v);
    req.body = in.body;
    HttpResponse res = handle(req);
    out.status = res.status;
    out.set_content(res.body.dump(-1, ' ', false, Json::error_handler_t::replace),
                    "application/json; charset=utf-8");
  };
  server_->Get(R"(/.*)", bridge);
  server_->Post(R"(/.*)", bridge);
  server_->Put(R"(/.*)", bridge);
  server_->Delete(R"(/.*)", bridge);
}

bool ApiService::serve(const std::string& host, int port) {
  install_handlers();
  return server_->listen(host, port);
}

bool ApiService::bind(const std::string& host, int port) {
  install_handlers();
  return server_->bind_to_port(host, port);
}

int ApiService::bind_any(const std::string& host) {
  install_handlers();
  return server_->bind_to_any_port(host);
}

bool ApiService::listen_after_bind() { return server_ && server_->listen_after_bind(); }

void ApiService::stop() {
  if (server_) server_->stop();
}

std::pair<std::string, int> parse_listen_address(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw ConfigError("listen address must be host:port, got '" + std::string(text) + "'");
  }
  auto port = parse_integer("port", text.substr(colon + 1));
  if (port < 0 || port > 65535) throw ConfigError("port out of range");
  return {std::string(text.substr(0, colon)), static_cast<int>(port)};
}

}  // namespace agrimon
