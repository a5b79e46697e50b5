#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agrimon/clock.hpp"
#include "agrimon/config.hpp"
#include "agrimon/detect.hpp"
#include "agrimon/gateway.hpp"
#include "agrimon/json_codec.hpp"
#include "agrimon/nodesim.hpp"
#include "agrimon/rng.hpp"
#include "agrimon/store.hpp"

namespace agrimon {

/// Everything a run needs, normally read from a sectioned config file:
///
///   [run]       seed, duration_s, start (YYYY-MM-DD or ms), eval_period_s, data_dir
///   [service]   listen (host:port), admin (true|false)
///   [detector]  any DetectorConfig field
///   [node <id>] NodeProfile fields; whitelisted (default true)
///   [whitelist] allow = comma-separated extra addresses
struct RunConfig {
  DetectorConfig detector;
  std::vector<NodeProfile> nodes;
  std::vector<std::string> extra_whitelist;
  std::vector<std::string> unlisted_nodes;  // node ids left off the whitelist
  std::uint64_t seed = 1;
  bool seed_from_run = true;  // derive node seeds from `seed` unless set per node
  double duration_s = 300;
  Timestamp start;
  double eval_period_s = 1;
  std::optional<std::filesystem::path> data_dir;
  std::string listen = "127.0.0.1:8080";
  bool admin_enabled = true;
  /// Drive the run from the system clock instead of the simulated one.
  bool wall_clock = false;

  /// One node at the default profile.
  static RunConfig single_node();
  void validate() const;
};

RunConfig run_config_from_sections(std::span<const Section> sections);

/// Alert kinds that count as detecting a given attack.
std::vector<AlertKind> expected_alerts(AttackKind kind);

struct ScenarioOutcome {
  AttackScenario scenario;
  std::optional<AlertEvent> first_alert;
  std::optional<double> latency_s;
};

struct RunReport {
  std::uint64_t seed = 0;
  Timestamp start;
  Timestamp end;
  std::vector<ScenarioOutcome> outcomes;
  std::vector<AlertEvent> alerts;
  GatewayStats gateway;
  std::size_t readings = 0;

  Json to_json() const;
  std::string to_text() const;
};

/// Tick loop: emit -> attack -> admit -> store -> evaluate.
///
/// Packets are held back until the clock reaches their arrival time. With a
/// wall clock, ingest() and evaluate() may run on two different threads.
class Simulation {
 public:
  Simulation(RunConfig config, std::vector<AttackScenario> scenarios);

  /// Advances one evaluation period (the first call processes t = start),
  /// then ingests and evaluates. Simulated clock only.
  void step();
  /// Emits due packets, applies attacks and admits everything that has arrived.
  void ingest();
  /// Forwards gateway alerts and runs the detector at the current time.
  void evaluate();
  /// Steps until the clock reaches start + duration.
  RunReport run();
  RunReport report() const;

  const RunConfig& config() const { return config_; }
  const std::vector<AttackScenario>& scenarios() const { return scenarios_; }
  const Clock& clock() const { return clock_; }
  Store& store() { return *store_; }
  Gateway& gateway() { return *gateway_; }
  Detector& detector() { return *detector_; }

 private:
  RunConfig config_;
  std::vector<AttackScenario> scenarios_;
  Clock clock_;
  std::unique_ptr<Store> store_;
  std::unique_ptr<Gateway> gateway_;
  std::unique_ptr<Detector> detector_;
  std::vector<SensorNode> nodes_;
  std::vector<RawPacket> in_flight_;
  Rng attack_rng_;
  bool started_ = false;
};

/// Recomputes outcomes for `scenarios` against persisted alerts.
std::vector<ScenarioOutcome> score_scenarios(std::span<const AttackScenario> scenarios,
                                             std::span<const AlertEvent> alerts);

}  // namespace agrimon
