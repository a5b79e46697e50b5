#include "agrimon/config.hpp"
#include "agrimon/simulation.hpp"
#include "doctest.h"

using namespace agrimon;

TEST_CASE("detector defaults") {
  DetectorConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.window().count() == 40'000);
  CHECK(c.history().count() == 160'000);
  CHECK(c.rise_threshold == 0.10);
  CHECK(c.drop_threshold == 0.04);
  CHECK(c.stale_timeout().count() == 60'000);
  CHECK(c.delay_threshold().count() == 30'000);
  CHECK(c.delay_min_count == 5);
  CHECK(c.gps_displacement_m == 50);
  CHECK(c.malformed_burst_count == 50);
  CHECK(c.malformed_burst_window().count() == 10'000);
  CHECK(c.alert_cooldown().count() == 30'000);
}

TEST_CASE("detector validation") {
  auto broken = [](auto mutate) {
    DetectorConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(broken([](auto& c) { c.window_s = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.history_s = 79; }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.history_s = 160.5; }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.delay_min_count = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.temp_min = 50; }).validate(), ConfigError);
  CHECK_THROWS_AS(broken([](auto& c) { c.drop_threshold = -0.04; }).validate(), ConfigError);
  CHECK_NOTHROW(broken([](auto& c) { c.history_s = 80; }).validate());
}

TEST_CASE("every key is settable") {
  DetectorConfig c;
  for (auto key : DetectorConfig::keys()) CHECK(c.set(key, "7"));
  CHECK(c.window_s == 7);
  CHECK(c.delay_min_count == 7);
  CHECK_FALSE(c.set("no_such_key", "1"));
  CHECK_THROWS_AS(c.set("window_s", "40s"), ConfigError);
  CHECK_THROWS_AS(c.set("delay_min_count", "2.5"), ConfigError);
}

TEST_CASE("numbers") {
  CHECK(parse_number("k", "-1.25") == -1.25);
  CHECK_THROWS_AS(parse_number("k", ""), ConfigError);
  CHECK_THROWS_AS(parse_number("k", "inf"), ConfigError);
  CHECK_THROWS_AS(parse_number("k", "1 "), ConfigError);
  CHECK(parse_integer("k", "-12") == -12);
  CHECK_THROWS_AS(parse_integer("k", "12.0"), ConfigError);
}

TEST_CASE("sectioned files") {
  auto sections = parse_sections(R"(
; comment
[run]
seed = 42
duration_s = 600

[node north]
source_address = 10.0.0.7
base_temp = 18

[scenario   flood]
kind = Flooding
start_s = 100
end_s = 140
)");
  REQUIRE(sections.size() == 3);
  CHECK(sections[0].type == "run");
  CHECK(sections[0].name.empty());
  CHECK(sections[1].type == "node");
  CHECK(sections[1].name == "north");
  CHECK(sections[2].name == "flood");
  CHECK(sections[2].entries.size() == 3);

  CHECK_THROWS_AS(parse_sections("seed = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_sections("[run]\nseed\n"), ConfigError);
  CHECK_THROWS_AS(parse_sections("[run]\na=1\n[run]\nb=2\n"), ConfigError);
}

TEST_CASE("run config from sections") {
  auto sections = parse_sections(R"(
[run]
seed = 9
duration_s = 120
start = 2024-05-01
[service]
listen = 0.0.0.0:9000
admin = false
[detector]
stale_timeout_s = 45
[node a]
source_address = 10.1.0.1
[node b]
whitelisted = false
rng_seed = 5
[whitelist]
allow = 10.9.9.9, 10.9.9.8
[scenario x]
kind = BlackHole
start_s = 1
end_s = 2
)");
  auto c = run_config_from_sections(sections);
  CHECK(c.seed == 9);
  CHECK(c.duration_s == 120);
  CHECK(c.start == *parse_iso_date("2024-05-01"));
  CHECK(c.listen == "0.0.0.0:9000");
  CHECK_FALSE(c.admin_enabled);
  CHECK(c.detector.stale_timeout_s == 45);
  REQUIRE(c.nodes.size() == 2);
  CHECK(c.nodes[0].source_address == "10.1.0.1");
  CHECK(c.nodes[1].source_address == "b");
  CHECK(c.unlisted_nodes == std::vector<std::string>{"b"});
  CHECK_FALSE(c.seed_from_run);
  CHECK(c.extra_whitelist == std::vector<std::string>{"10.9.9.9", "10.9.9.8"});
  CHECK_NOTHROW(c.validate());

  CHECK_THROWS_AS(run_config_from_sections(parse_sections("[bogus]\na=1\n")), ConfigError);
  CHECK_THROWS_AS(run_config_from_sections(parse_sections("[run]\nspeed=1\n")), ConfigError);
  CHECK_THROWS_AS(run_config_from_sections(parse_sections("[node]\nbase_temp=1\n")), ConfigError);
  CHECK_THROWS_AS(run_config_from_sections(parse_sections("[node n]\nbase_temp=warm\n")),
                  ConfigError);
}

TEST_CASE("run config validation") {
  auto c = RunConfig::single_node();
  CHECK_NOTHROW(c.validate());
  c.listen = "nohost";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig::single_node();
  c.nodes.push_back(c.nodes.front());
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
