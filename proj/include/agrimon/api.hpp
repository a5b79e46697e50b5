#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <string>

#include "agrimon/clock.hpp"
#include "agrimon/config.hpp"
#include "agrimon/gateway.hpp"
#include "agrimon/json_codec.hpp"
#include "agrimon/store.hpp"

namespace httplib {
class Server;
}

namespace agrimon {

inline constexpr int kApiSchemaVersion = 1;

struct HttpRequest {
  std::string method = "GET";
  std::string path;
  std::multimap<std::string, std::string> params;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  Json body;
};

struct ApiOptions {
  bool admin_enabled = true;
};

/// The JSON contract polled by the dashboard.
///
///   GET  /api/realtime?node=          latest reading per field + advisories
///   GET  /api/volume[?node=]          window stats and the per-second trend
///   GET  /api/history?node&field&day  24 hourly buckets
///   GET  /api/compare?node&field&day[&hour]
///   GET  /api/week?node&field&start   7 daily high/low pairs
///   GET  /api/alerts[?since&kind]     newest first
///   GET  /api/position?node=          latest GPS fix
///   GET  /api/gateway                 admission counters and whitelist
///   POST /api/admin/whitelist         {"address", "action": "add"|"remove"}
///
/// Every body carries `schema_version`. Unknown parameters are a 400,
/// unknown paths a 404. Handlers only read, except the whitelist admin call.
class ApiService {
 public:
  /// `gateway` may be null (read-only replay); admin calls then return 503.
  ApiService(const Store& store, Gateway* gateway, const DetectorConfig& cfg, const Clock& clock,
             ApiOptions options = {});
  ~ApiService();

  HttpResponse handle(const HttpRequest& request) const;

  /// Binds and serves until stop(). Returns false if the address cannot be bound.
  bool serve(const std::string& host, int port);
  /// Binds without serving yet; call listen_after_bind() next.
  bool bind(const std::string& host, int port);
  /// Binds to an ephemeral port; returns it (or -1). Call listen_after_bind() next.
  int bind_any(const std::string& host);
  bool listen_after_bind();
  void stop();

 private:
  HttpResponse route(const HttpRequest& request) const;
  void install_handlers();

  const Store& store_;
  Gateway* gateway_;
  DetectorConfig cfg_;
  const Clock& clock_;
  ApiOptions options_;
  std::unique_ptr<httplib::Server> server_;
};

/// Splits "host:port"; throws ConfigError when malformed.
std::pair<std::string, int> parse_listen_address(std::string_view text);

}  // namespace agrimon
