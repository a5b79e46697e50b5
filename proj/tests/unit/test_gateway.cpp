#include <random>

#include "agrimon/gateway.hpp"
#include "agrimon/payload.hpp"
#include "doctest.h"

using namespace agrimon;

namespace {

RawPacket packet(std::string from, std::string payload, std::int64_t at = 1000) {
  return {std::move(from), std::move(payload), Timestamp(at), Timestamp(at)};
}

// Largest number of timestamps in any window (t - w, t], by exhaustive scan.
std::size_t max_window_count(const std::vector<Timestamp>& ts, Duration w) {
  std::size_t best = 0;
  for (auto t : ts) {
    std::size_t n = 0;
    for (auto u : ts) n += (u > t - w && u <= t) ? 1 : 0;
    best = std::max(best, n);
  }
  return best;
}

}  // namespace

TEST_CASE("screening examples") {
  Whitelist wl{"10.0.0.1"};
  auto ok = screen(packet("10.0.0.1", "temperature: 23.5"), wl);
  REQUIRE(ok.admitted());
  REQUIRE(ok.readings.size() == 1);
  CHECK(ok.readings[0].field == Field::Temperature);
  CHECK(ok.readings[0].value == 23.5);
  CHECK(ok.readings[0].node_id == "10.0.0.1");
  CHECK(ok.readings[0].seq == 0);

  CHECK(screen(packet("10.0.0.2", "temperature: 23.5"), wl).rejected == RejectionReason::UnauthorizedSource);
  CHECK(screen(packet("10.0.0.1", "humidity: 150"), wl).rejected == RejectionReason::OutOfRange);
  CHECK(screen(packet("10.0.0.1", ""), wl).rejected == RejectionReason::Empty);
  CHECK(screen(packet("10.0.0.1", "wind: 3"), wl).rejected == RejectionReason::UnknownField);
}

TEST_CASE("whitelist is checked before the payload") {
  Whitelist wl{"10.0.0.1"};
  for (const char* payload : {"", "garbage", "humidity: 150", "temperature: 20"}) {
    CHECK(screen(packet("10.0.0.9", payload), wl).rejected == RejectionReason::UnauthorizedSource);
  }
}

TEST_CASE("one bad value rejects the whole packet") {
  Whitelist wl{"a"};
  auto r = screen(packet("a", "temperature: 20\nhumidity: 101"), wl);
  CHECK(r.rejected == RejectionReason::OutOfRange);
  CHECK(r.readings.empty());
  CHECK_FALSE(r.detail.empty());
}

TEST_CASE("times and identities") {
  Whitelist wl;
  wl.add("10.0.0.1", "north");
  RawPacket p{"10.0.0.1", "temperature: 20\nsampled_at: 400", Timestamp(500), Timestamp(900)};
  auto r = screen(p, wl);
  REQUIRE(r.admitted());
  CHECK(r.readings[0].node_id == "north");
  CHECK(r.readings[0].sampled_at == Timestamp(400));
  CHECK(r.readings[0].received_at == Timestamp(900));

  p.payload = "temperature: 20";
  CHECK(screen(p, wl).readings[0].sampled_at == Timestamp(500));

  CHECK(wl.remove("10.0.0.1"));
  CHECK_FALSE(wl.remove("10.0.0.1"));
  CHECK_FALSE(wl.contains("10.0.0.1"));
}

TEST_CASE("malformed bursts") {
  DetectorConfig cfg;
  std::vector<Timestamp> fifty_in_5s, forty_nine_in_10s, fifty_over_100s;
  for (int i = 0; i < 50; ++i) fifty_in_5s.push_back(Timestamp(i * 100LL));
  for (int i = 0; i < 49; ++i) forty_nine_in_10s.push_back(Timestamp(i * 200LL));
  for (int i = 0; i < 50; ++i) fifty_over_100s.push_back(Timestamp(i * 2000LL));

  CHECK(max_window_count(fifty_in_5s, cfg.malformed_burst_window()) >= 50);
  auto a = track_malformed(fifty_in_5s, cfg);
  REQUIRE(a);
  CHECK(a->kind == AlertKind::MalformedBurst);
  CHECK(a->detected_at == Timestamp(4900));

  CHECK_FALSE(track_malformed(forty_nine_in_10s, cfg));
  CHECK(max_window_count(fifty_over_100s, cfg.malformed_burst_window()) < 50);
  CHECK_FALSE(track_malformed(fifty_over_100s, cfg));
}

TEST_CASE("burst tracking agrees with an exhaustive window scan") {
  DetectorConfig cfg;
  cfg.malformed_burst_count = 12;
  std::mt19937_64 gen(5);
  for (int instance = 0; instance < 300; ++instance) {
    std::vector<Timestamp> ts;
    std::int64_t t = 0;
    const int n = 5 + static_cast<int>(gen() % 60);
    const auto gap = 50 + static_cast<std::int64_t>(gen() % 2000);
    for (int i = 0; i < n; ++i) {
      t += static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(gap));
      ts.push_back(Timestamp(t));
    }
    const bool expect = max_window_count(ts, cfg.malformed_burst_window()) >=
                        static_cast<std::size_t>(cfg.malformed_burst_count);
    REQUIRE(track_malformed(ts, cfg).has_value() == expect);
  }
}

TEST_CASE("gateway persists what it admits and logs what it refuses") {
  Store store;
  DetectorConfig cfg;
  Gateway gw(store, Whitelist{"10.0.0.1"}, cfg);

  auto r = gw.admit(packet("10.0.0.1", "temperature: 20\nhumidity: 50"));
  REQUIRE(r.admitted());
  CHECK(r.readings[0].seq == 1);
  CHECK(r.readings[1].seq == 2);
  CHECK(store.reading_count() == 2);

  CHECK_FALSE(gw.admit(packet("10.0.0.1", "temperature: hot")).admitted());
  CHECK_FALSE(gw.admit(packet("10.6.6.6", "temperature: 20", 2000)).admitted());
  CHECK_FALSE(gw.admit(packet("10.6.6.6", "temperature: 20", 3000)).admitted());
  CHECK(store.reading_count() == 2);
  CHECK(store.rejection_count() == 3);

  auto alerts = gw.take_alerts();
  REQUIRE(alerts.size() == 1);  // the second rogue packet is inside the cooldown
  CHECK(alerts[0].kind == AlertKind::UnauthorizedSource);
  CHECK(alerts[0].node_id == "10.6.6.6");
  CHECK(gw.take_alerts().empty());

  auto stats = gw.stats();
  CHECK(stats.admitted_packets == 1);
  CHECK(stats.admitted_readings == 2);
  CHECK(stats.unauthorized == 2);
  CHECK(stats.rejected[RejectionReason::NonNumeric] == 1);

  gw.allow("10.6.6.6", "rogue-turned-good");
  auto later = gw.admit(packet("10.6.6.6", "humidity: 40", 4000));
  REQUIRE(later.admitted());
  CHECK(later.readings[0].node_id == "rogue-turned-good");
  CHECK(gw.revoke("10.6.6.6"));
  CHECK_FALSE(gw.admit(packet("10.6.6.6", "humidity: 40", 5000)).admitted());
}

TEST_CASE("gateway raises malformed bursts") {
  Store store;
  DetectorConfig cfg;
  Gateway gw(store, Whitelist{"a"}, cfg);
  for (int i = 0; i < 60; ++i) gw.admit(packet("a", "??", 1000 + i * 10));
  auto alerts = gw.take_alerts();
  REQUIRE(alerts.size() == 1);
  CHECK(alerts[0].kind == AlertKind::MalformedBurst);
  CHECK(alerts[0].detected_at == Timestamp(1000 + 49 * 10));
}
