#include "agrimon/simulation.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

#include "agrimon/api.hpp"
#include "agrimon/payload.hpp"

namespace agrimon {
namespace {

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(std::string(key) + ": expected true or false");
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    auto comma = v.find(',', pos);
    if (comma == std::string_view::npos) comma = v.size();
    auto item = v.substr(pos, comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    pos = comma + 1;
  }
  return out;
}

NodeProfile node_from_section(const Section& s) {
  NodeProfile p;
  p.node_id = s.name;
  p.source_address = s.name;
  for (const auto& [key, value] : s.entries) {
    if (key == "source_address") p.source_address = value;
    else if (key == "sample_period_s") p.sample_period_s = parse_number(key, value);
    else if (key == "gps_period_s") p.gps_period_s = parse_number(key, value);
    else if (key == "base_temp") p.base_temp = parse_number(key, value);
    else if (key == "base_hum") p.base_hum = parse_number(key, value);
    else if (key == "base_lat") p.base_lat = parse_number(key, value);
    else if (key == "base_lon") p.base_lon = parse_number(key, value);
    else if (key == "jitter_amplitude") p.jitter_amplitude = parse_number(key, value);
    else if (key == "gps_jitter_deg") p.gps_jitter_deg = parse_number(key, value);
    else if (key == "transit_jitter_s") p.transit_jitter_s = parse_number(key, value);
    else if (key == "rng_seed") p.rng_seed = static_cast<std::uint64_t>(parse_integer(key, value));
    else if (key != "whitelisted") throw ConfigError("node " + s.name + ": unknown key '" + key + "'");
  }
  return p;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

RunConfig RunConfig::single_node() {
  RunConfig c;
  c.nodes.push_back(NodeProfile{});
  return c;
}

void RunConfig::validate() const {
  detector.validate();
  if (nodes.empty()) throw ConfigError("at least one [node] is required");
  for (const auto& n : nodes) n.validate();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (nodes[i].node_id == nodes[j].node_id) throw ConfigError("duplicate node " + nodes[i].node_id);
    }
  }
  if (!(duration_s >= 0)) throw ConfigError("duration_s must be >= 0");
  if (!(eval_period_s > 0)) throw ConfigError("eval_period_s must be > 0");
  if (start.millis() < 0) throw ConfigError("start must not precede the epoch");
  parse_listen_address(listen);
}

RunConfig run_config_from_sections(std::span<const Section> sections) {
  RunConfig c;
  for (const auto& s : sections) {
    if (s.type == "run") {
      for (const auto& [key, value] : s.entries) {
        if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_integer(key, value));
        else if (key == "duration_s") c.duration_s = parse_number(key, value);
        else if (key == "eval_period_s") c.eval_period_s = parse_number(key, value);
        else if (key == "data_dir") c.data_dir = value;
        else if (key == "start") {
          if (auto d = parse_iso_date(value)) c.start = *d;
          else c.start = Timestamp(parse_integer(key, value));
        } else throw ConfigError("[run]: unknown key '" + key + "'");
      }
    } else if (s.type == "service") {
      for (const auto& [key, value] : s.entries) {
        if (key == "listen") c.listen = value;
        else if (key == "admin") c.admin_enabled = parse_bool(key, value);
        else throw ConfigError("[service]: unknown key '" + key + "'");
      }
    } else if (s.type == "detector") {
      for (const auto& [key, value] : s.entries) {
        if (!c.detector.set(key, value)) throw ConfigError("[detector]: unknown key '" + key + "'");
      }
    } else if (s.type == "node") {
      if (s.name.empty()) throw ConfigError("[node] sections need an id: [node <id>]");
      c.nodes.push_back(node_from_section(s));
      for (const auto& [key, value] : s.entries) {
        if (key == "whitelisted" && !parse_bool(key, value)) c.unlisted_nodes.push_back(s.name);
        if (key == "rng_seed") c.seed_from_run = false;
      }
    } else if (s.type == "whitelist") {
      for (const auto& [key, value] : s.entries) {
        if (key != "allow") throw ConfigError("[whitelist]: unknown key '" + key + "'");
        for (auto& a : split_list(value)) c.extra_whitelist.push_back(std::move(a));
      }
    } else if (s.type != "scenario") {
      throw ConfigError("unknown section [" + s.type + "]");
    }
  }
  return c;
}

std::vector<AlertKind> expected_alerts(AttackKind kind) {
  switch (kind) {
    case AttackKind::Flooding: return {AlertKind::FloodingSuspected, AlertKind::MalformedBurst};
    case AttackKind::SelectiveForwarding:
    case AttackKind::BlackHole:
    case AttackKind::Sinkhole:
    case AttackKind::Misdirection: return {AlertKind::DataLossSuspected, AlertKind::StaleData};
    case AttackKind::DelaySkew: return {AlertKind::DataDelay};
    case AttackKind::GpsTamper: return {AlertKind::GpsTamper};
    case AttackKind::MalformedStorm:
      return {AlertKind::MalformedBurst, AlertKind::DataLossSuspected};
    case AttackKind::UnauthorizedSender: return {AlertKind::UnauthorizedSource};
  }
  return {};
}

std::vector<ScenarioOutcome> score_scenarios(std::span<const AttackScenario> scenarios,
                                             std::span<const AlertEvent> alerts) {
  std::vector<ScenarioOutcome> out;
  for (const auto& sc : scenarios) {
    ScenarioOutcome o{sc, std::nullopt, std::nullopt};
    const auto kinds = expected_alerts(sc.kind);
    for (const auto& a : alerts) {
      if (a.detected_at < sc.start_at) continue;
      if (std::find(kinds.begin(), kinds.end(), a.kind) == kinds.end()) continue;
      if (!o.first_alert || a.detected_at < o.first_alert->detected_at) o.first_alert = a;
    }
    if (o.first_alert) {
      o.latency_s = static_cast<double>((o.first_alert->detected_at - sc.start_at).count()) / 1000.0;
    }
    out.push_back(std::move(o));
  }
  return out;
}

Simulation::Simulation(RunConfig config, std::vector<AttackScenario> scenarios)
    : config_(std::move(config)),
      scenarios_(std::move(scenarios)),
      clock_(config_.wall_clock ? Clock::wall() : Clock::simulated(config_.start)),
      attack_rng_(derive_seed(config_.seed, 1000)) {
  config_.validate();
  for (std::size_t i = 0; i < config_.nodes.size(); ++i) {
    if (config_.seed_from_run) config_.nodes[i].rng_seed = derive_seed(config_.seed, i);
  }
  for (auto& sc : scenarios_) {
    for (const auto& n : config_.nodes) {
      if (sc.target == n.node_id) sc.target = n.source_address;
    }
    sc.validate();
  }

  store_ = config_.data_dir ? std::make_unique<Store>(*config_.data_dir) : std::make_unique<Store>();
  Whitelist wl;
  std::vector<std::string> expected;
  for (const auto& n : config_.nodes) {
    expected.push_back(n.node_id);
    if (std::find(config_.unlisted_nodes.begin(), config_.unlisted_nodes.end(), n.node_id) ==
        config_.unlisted_nodes.end()) {
      wl.add(n.source_address, n.node_id);
    }
    nodes_.emplace_back(n, config_.start);
  }
  for (const auto& a : config_.extra_whitelist) wl.add(a);
  gateway_ = std::make_unique<Gateway>(*store_, std::move(wl), config_.detector);
  detector_ = std::make_unique<Detector>(*store_, config_.detector, std::move(expected), config_.start);
}

void Simulation::step() {
  if (started_) clock_.advance(seconds_to_duration(config_.eval_period_s));
  started_ = true;
  ingest();
  evaluate();
}

void Simulation::ingest() {
  const Timestamp now = clock_.now();
  std::vector<RawPacket> packets;
  for (auto& node : nodes_) {
    auto emitted = node.emit(clock_);
    packets.insert(packets.end(), std::make_move_iterator(emitted.begin()),
                   std::make_move_iterator(emitted.end()));
  }
  packets = apply_attacks(std::move(packets), scenarios_, attack_rng_);
  in_flight_.insert(in_flight_.end(), std::make_move_iterator(packets.begin()),
                    std::make_move_iterator(packets.end()));
  std::stable_sort(in_flight_.begin(), in_flight_.end(),
                   [](const RawPacket& a, const RawPacket& b) { return a.arrived_at < b.arrived_at; });
  auto due = std::find_if(in_flight_.begin(), in_flight_.end(),
                          [&](const RawPacket& p) { return p.arrived_at > now; });
  for (auto it = in_flight_.begin(); it != due; ++it) gateway_->admit(*it);
  in_flight_.erase(in_flight_.begin(), due);
}

void Simulation::evaluate() {
  for (auto& a : gateway_->take_alerts()) detector_->submit(std::move(a));
  detector_->evaluate(clock_.now());
}

RunReport Simulation::run() {
  const Timestamp end = config_.start + seconds_to_duration(config_.duration_s);
  if (!started_) step();
  const Duration period = seconds_to_duration(config_.eval_period_s);
  while (clock_.now() + period <= end) step();
  return report();
}

RunReport Simulation::report() const {
  RunReport r;
  r.seed = config_.seed;
  r.start = config_.start;
  r.end = clock_.now();
  r.alerts = store_->query_alerts(Timestamp(std::numeric_limits<std::int64_t>::min()),
                                  Timestamp(std::numeric_limits<std::int64_t>::max()));
  r.outcomes = score_scenarios(scenarios_, r.alerts);
  r.gateway = gateway_->stats();
  r.readings = store_->reading_count();
  return r;
}

Json RunReport::to_json() const {
  auto rel = [&](Timestamp t) { return static_cast<double>((t - start).count()) / 1000.0; };
  Json scenarios = Json::array();
  for (const auto& o : outcomes) {
    Json params = Json::object();
    for (const auto& [k, v] : o.scenario.params) params[k] = v;
    scenarios.push_back(Json{
        {"name", o.scenario.name},
        {"kind", attack_kind_name(o.scenario.kind)},
        {"target", o.scenario.target},
        {"start_s", rel(o.scenario.start_at)},
        {"end_s", rel(o.scenario.end_at)},
        {"params", params},
        {"first_alert", o.first_alert ? Json(alert_kind_name(o.first_alert->kind)) : Json(nullptr)},
        {"first_alert_s", o.first_alert ? Json(rel(o.first_alert->detected_at)) : Json(nullptr)},
        {"latency_s", o.latency_s ? Json(*o.latency_s) : Json(nullptr)}});
  }
  Json alert_list = Json::array();
  for (const auto& a : alerts) {
    Json j = agrimon::to_json(a);
    j["t_s"] = rel(a.detected_at);
    alert_list.push_back(std::move(j));
  }
  Json rejected = Json::object();
  for (const auto& [reason, n] : gateway.rejected) rejected[std::string(rejection_name(reason))] = n;
  return Json{{"schema_version", 1},
              {"seed", seed},
              {"start", start.millis()},
              {"end", end.millis()},
              {"duration_s", rel(end)},
              {"readings", readings},
              {"gateway",
               {{"admitted_packets", gateway.admitted_packets},
                {"admitted_readings", gateway.admitted_readings},
                {"unauthorized", gateway.unauthorized},
                {"rejected", rejected}}},
              {"scenarios", scenarios},
              {"alerts", alert_list}};
}

std::string RunReport::to_text() const {
  auto rel = [&](Timestamp t) { return static_cast<double>((t - start).count()) / 1000.0; };
  std::ostringstream out;
  std::uint64_t rejected_total = 0;
  for (const auto& [_, n] : gateway.rejected) rejected_total += n;
  out << "run report\n";
  out << "seed " << seed << "  start " << format_iso_date(start) << " (" << start.millis()
      << " ms)  duration " << fixed3(rel(end)) << " s\n";
  out << "readings " << readings << "  admitted packets " << gateway.admitted_packets
      << "  rejected " << rejected_total << "  unauthorized " << gateway.unauthorized << "\n\n";

  out << pad("scenario", 16) << pad("kind", 21) << pad("start_s", 10) << pad("end_s", 10)
      << pad("first alert", 20) << "latency_s\n";
  if (outcomes.empty()) out << "(none)\n";
  for (const auto& o : outcomes) {
    out << pad(o.scenario.name, 16) << pad(std::string(attack_kind_name(o.scenario.kind)), 21)
        << pad(fixed3(rel(o.scenario.start_at)), 10) << pad(fixed3(rel(o.scenario.end_at)), 10)
        << pad(o.first_alert ? std::string(alert_kind_name(o.first_alert->kind)) : "-", 20)
        << (o.latency_s ? fixed3(*o.latency_s) : "-") << "\n";
  }

  out << "\nalerts (" << alerts.size() << ")\n";
  out << pad("t_s", 10) << pad("kind", 20) << pad("node", 16) << "evidence\n";
  for (const auto& a : alerts) {
    out << pad(fixed3(rel(a.detected_at)), 10) << pad(std::string(alert_kind_name(a.kind)), 20)
        << pad(a.node_id.value_or("-"), 16) << a.evidence << "\n";
  }
  return out.str();
}

}  // namespace agrimon
