// agrimon: run the monitoring pipeline, summarize a finished run, or replay
// a reading log through the detector.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <thread>

#include "CLI11.hpp"
#include "agrimon/api.hpp"
#include "agrimon/simulation.hpp"

using namespace agrimon;
namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

const char* const kLogs[] = {"readings.log", "alerts.log", "rejections.log"};

struct DetectorFlags {
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    for (auto key : DetectorConfig::keys()) {
      std::string k(key);
      app->add_option("--" + k, values[k], "Detector override")->group("Detector");
    }
  }

  void apply(DetectorConfig& cfg) const {
    for (const auto& [k, v] : values) {
      if (!v.empty()) cfg.set(k, v);
    }
    cfg.validate();
  }
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::optional<Json> read_report(const fs::path& dir) {
  std::ifstream in(dir / "report.json");
  if (!in) return std::nullopt;
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error((dir / "report.json").string() + " is not valid JSON");
  return j;
}

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------- run

struct RunArgs {
  std::string config;
  std::vector<std::string> scenarios;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  bool wall = false;
  std::string serve;
  std::string data_dir;
  std::string report_dir;
  bool force = false;
  bool quiet = false;
  DetectorFlags detector;
};

void prepare_data_dir(const fs::path& dir, bool force) {
  if (!fs::exists(dir)) return;
  for (const char* name : kLogs) {
    const auto p = dir / name;
    if (fs::exists(p) && fs::file_size(p) > 0) {
      if (!force) {
        throw ConfigError(dir.string() + " already holds a run (" + name +
                          "); pass --force to overwrite it");
      }
    }
  }
  if (force) {
    for (const char* name : kLogs) fs::remove(dir / name);
    fs::remove(dir / "report.json");
    fs::remove(dir / "report.txt");
  }
}

struct Server {
  std::unique_ptr<ApiService> api;
  std::thread thread;

  void start(Simulation& sim, const RunConfig& cfg) {
    auto [host, port] = parse_listen_address(cfg.listen);
    api = std::make_unique<ApiService>(sim.store(), &sim.gateway(), cfg.detector, sim.clock(),
                                       ApiOptions{cfg.admin_enabled});
    if (port == 0) {
      port = api->bind_any(host);
    } else if (!api->bind(host, port)) {
      port = -1;
    }
    if (port < 0) throw std::runtime_error("cannot listen on " + cfg.listen);
    thread = std::thread([this] { api->listen_after_bind(); });
    std::cout << "serving http://" << host << ":" << port << "/api/" << std::endl;
  }

  void stop() {
    if (!api) return;
    api->stop();
    if (thread.joinable()) thread.join();
  }
};

void wait_for_interrupt() {
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

int cmd_run(RunArgs& args, const CLI::App& app) {
  auto sections = load_sections(args.config);
  RunConfig cfg = run_config_from_sections(sections);
  if (cfg.nodes.empty()) cfg.nodes.push_back(NodeProfile{});
  if (args.seed) cfg.seed = *args.seed;
  if (args.duration) cfg.duration_s = *args.duration;
  if (!args.data_dir.empty()) cfg.data_dir = fs::path(args.data_dir);
  if (!args.serve.empty()) cfg.listen = args.serve;
  args.detector.apply(cfg.detector);
  cfg.wall_clock = args.wall;
  if (cfg.wall_clock) cfg.start = Clock::wall().now();

  std::vector<AttackScenario> scenarios = scenarios_from_sections(sections, cfg.start);
  for (const auto& path : args.scenarios) {
    auto more = scenarios_from_sections(load_sections(path), cfg.start);
    if (more.empty()) throw ConfigError(path + ": no [scenario <name>] sections");
    scenarios.insert(scenarios.end(), more.begin(), more.end());
  }
  cfg.validate();
  if (cfg.data_dir) prepare_data_dir(*cfg.data_dir, args.force);

  Simulation sim(cfg, scenarios);
  Server server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  RunReport report;
  if (!cfg.wall_clock) {
    report = sim.run();
    if (!args.serve.empty()) server.start(sim, sim.config());
  } else {
    server.start(sim, sim.config());
    const bool bounded = app.count("--duration") > 0;
    const Timestamp end = cfg.start + seconds_to_duration(cfg.duration_s);
    const auto period = seconds_to_duration(cfg.eval_period_s);
    std::atomic<bool> stop{false};
    std::thread ingestion([&] {
      while (!stop) {
        sim.ingest();
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
    });
    Timestamp next = cfg.start;
    while (!g_interrupted && !(bounded && sim.clock().now() >= end)) {
      if (sim.clock().now() >= next) {
        sim.evaluate();
        next += period;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    stop = true;
    ingestion.join();
    sim.evaluate();
    report = sim.report();
  }

  const std::string json = report.to_json().dump(2) + "\n";
  const std::string text = report.to_text();
  std::optional<fs::path> out_dir;
  if (!args.report_dir.empty()) out_dir = fs::path(args.report_dir);
  else if (cfg.data_dir) out_dir = *cfg.data_dir;
  if (out_dir) {
    fs::create_directories(*out_dir);
    write_file(*out_dir / "report.json", json);
    write_file(*out_dir / "report.txt", text);
  }
  if (!args.quiet) std::cout << text << std::flush;
  if (out_dir && !args.quiet) std::cout << "\nreport written to " << (*out_dir / "report.json").string() << "\n";

  if (!cfg.wall_clock && !args.serve.empty()) {
    std::cout << "run finished; serving its results until interrupted" << std::endl;
    wait_for_interrupt();
  }
  server.stop();
  return 0;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::string data_dir;
  std::string csv;
};

std::pair<Timestamp, Timestamp> run_span(const Store& store, const std::optional<Json>& summary) {
  if (summary && summary->contains("start") && summary->contains("end")) {
    return {Timestamp((*summary)["start"].get<std::int64_t>()),
            Timestamp((*summary)["end"].get<std::int64_t>())};
  }
  auto readings = store.all_readings();
  if (readings.empty()) return {Timestamp(0), Timestamp(0)};
  Timestamp lo = readings.front().received_at, hi = lo;
  for (const auto& r : readings) {
    lo = std::min(lo, r.received_at);
    hi = std::max(hi, r.received_at);
  }
  lo = Timestamp(lo.millis() - lo.millis() % 1000);
  return {lo, hi};
}

int cmd_report(const ReportArgs& args) {
  const fs::path dir(args.data_dir);
  Store store(dir, Store::Mode::ReadOnly);
  const auto summary = read_report(dir);
  const auto [start, end] = run_span(store, summary);

  // Per-second arrivals, the raw material of both plotted curves.
  struct Row {
    double t_s;
    std::size_t count;
    std::size_t aggregated;
  };
  std::vector<Row> rows;
  std::size_t total = 0;
  for (Timestamp t = start; t <= end; t += std::chrono::seconds(1)) {
    const std::size_t n = store.count_received(t, t + std::chrono::seconds(1));
    total += n;
    rows.push_back({(t - start).count() / 1000.0, n, total});
  }

  if (!args.csv.empty()) {
    std::ostringstream csv;
    csv << "t_s,count_per_s,aggregated\n";
    for (const auto& r : rows) csv << fixed(r.t_s, 0) << "," << r.count << "," << r.aggregated << "\n";
    if (args.csv == "-") {
      std::cout << csv.str();
      return 0;
    }
    write_file(args.csv, csv.str());
  }

  std::cout << "data dir " << dir.string() << "\n";
  std::cout << "span " << fixed((end - start).count() / 1000.0) << " s from " << start.millis()
            << " ms; " << store.reading_count() << " readings, " << store.rejection_count()
            << " rejections, " << store.alert_count() << " alerts\n\n";

  std::cout << "volume trend (readings per 10 s)\n";
  std::size_t peak = 1;
  std::vector<std::pair<double, std::size_t>> tens;
  for (std::size_t i = 0; i < rows.size(); i += 10) {
    std::size_t sum = 0;
    for (std::size_t k = i; k < std::min(rows.size(), i + 10); ++k) sum += rows[k].count;
    tens.emplace_back(rows[i].t_s, sum);
    peak = std::max(peak, sum);
  }
  for (const auto& [t, n] : tens) {
    const auto bar = static_cast<std::size_t>(50.0 * static_cast<double>(n) / static_cast<double>(peak));
    std::printf("%8.0f s %6zu  %s\n", t, n, std::string(bar, '#').c_str());
  }

  std::cout << "\nalerts\n";
  std::printf("%-10s %-20s %-16s %s\n", "t_s", "kind", "node", "evidence");
  for (const auto& a : store.query_alerts(Timestamp(std::numeric_limits<std::int64_t>::min()),
                                          Timestamp(std::numeric_limits<std::int64_t>::max()))) {
    std::printf("%-10s %-20s %-16s %s\n", fixed((a.detected_at - start).count() / 1000.0).c_str(),
                std::string(alert_kind_name(a.kind)).c_str(), a.node_id.value_or("-").c_str(),
                a.evidence.c_str());
  }

  std::cout << "\nlatency by attack\n";
  if (!summary || (*summary)["scenarios"].empty()) {
    std::cout << "(no scenarios recorded)\n";
  } else {
    std::printf("%-16s %-20s %-9s %-20s %s\n", "scenario", "kind", "start_s", "first alert", "latency_s");
    for (const auto& s : (*summary)["scenarios"]) {
      std::printf("%-16s %-20s %-9s %-20s %s\n", s["name"].get<std::string>().c_str(),
                  s["kind"].get<std::string>().c_str(), fixed(s["start_s"].get<double>()).c_str(),
                  s["first_alert"].is_null() ? "-" : s["first_alert"].get<std::string>().c_str(),
                  s["latency_s"].is_null() ? "-" : fixed(s["latency_s"].get<double>()).c_str());
    }
  }
  if (!args.csv.empty()) std::cout << "\nper-second counts written to " << args.csv << "\n";
  return 0;
}

// ---------------------------------------------------------------- replay

struct ReplayArgs {
  std::string data_dir;
  double speed = 0;
  double eval_period_s = 1;
  std::string out;
  DetectorFlags detector;
};

int cmd_replay(ReplayArgs& args) {
  const fs::path dir(args.data_dir);
  Store source(dir, Store::Mode::ReadOnly);
  const auto summary = read_report(dir);
  auto [start, end] = run_span(source, summary);

  DetectorConfig cfg;
  args.detector.apply(cfg);
  auto readings = source.all_readings();
  std::stable_sort(readings.begin(), readings.end(),
                   [](const auto& a, const auto& b) { return a.received_at < b.received_at; });
  for (const auto& r : readings) end = std::max(end, r.received_at);

  Store replay;
  Detector detector(replay, cfg, source.nodes(), start);
  const auto period = seconds_to_duration(args.eval_period_s);
  if (period.count() <= 0) throw ConfigError("--eval-period must be positive");
  std::size_t next = 0;
  for (Timestamp t = start; t <= end && !g_interrupted; t += period) {
    while (next < readings.size() && readings[next].received_at <= t) replay.append_reading(readings[next++]);
    detector.evaluate(t);
    if (args.speed > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(args.eval_period_s / args.speed));
    }
  }

  const auto everything = [](const Store& s) {
    return s.query_alerts(Timestamp(std::numeric_limits<std::int64_t>::min()),
                          Timestamp(std::numeric_limits<std::int64_t>::max()));
  };
  const auto original = everything(source);
  const auto replayed = everything(replay);

  std::printf("replayed %zu readings over %s s\n\n", readings.size(), fixed((end - start).count() / 1000.0).c_str());
  std::printf("%-10s %-20s %-16s %s\n", "t_s", "kind", "node", "evidence");
  for (const auto& a : replayed) {
    std::printf("%-10s %-20s %-16s %s\n", fixed((a.detected_at - start).count() / 1000.0).c_str(),
                std::string(alert_kind_name(a.kind)).c_str(), a.node_id.value_or("-").c_str(),
                a.evidence.c_str());
  }
  std::map<AlertKind, std::pair<int, int>> per_kind;
  for (const auto& a : original) per_kind[a.kind].first++;
  for (const auto& a : replayed) per_kind[a.kind].second++;
  std::printf("\n%-20s %9s %9s\n", "kind", "recorded", "replayed");
  for (const auto& [kind, n] : per_kind) {
    std::printf("%-20s %9d %9d\n", std::string(alert_kind_name(kind)).c_str(), n.first, n.second);
  }
  std::printf("(gateway alerts, UnauthorizedSource and MalformedBurst, are not re-derived)\n");

  if (!args.out.empty()) {
    Json list = Json::array();
    for (const auto& a : replayed) list.push_back(to_json(a));
    write_file(args.out, Json{{"schema_version", 1}, {"start", start.millis()}, {"alerts", list}}.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agrimon: sensor monitoring pipeline with attack simulation"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run the pipeline on a simulated or wall clock");
  run_cmd->add_option("--config", run.config, "Sectioned key = value run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--scenario", run.scenarios, "Attack scenario file (repeatable)")
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run.seed, "Base seed for every random stream");
  run_cmd->add_option("--duration", run.duration, "Seconds to run");
  auto* sim_flag = run_cmd->add_flag("--sim", "Simulated clock (default)");
  run_cmd->add_flag("--wall", run.wall, "Wall clock; runs until interrupted or --duration")->excludes(sim_flag);
  run_cmd->add_option("--serve", run.serve, "Serve the HTTP API on host:port (port 0 picks one)");
  run_cmd->add_option("--data-dir", run.data_dir, "Persist logs and reports here");
  run_cmd->add_option("--report-dir", run.report_dir, "Write report.json and report.txt here");
  run_cmd->add_flag("--force", run.force, "Overwrite an existing run in --data-dir");
  run_cmd->add_flag("--quiet", run.quiet, "Do not print the text report");
  run.detector.attach(run_cmd);

  ReportArgs rep;
  auto* report_cmd = app.add_subcommand("report", "Summarize a persisted run");
  report_cmd->add_option("--data-dir", rep.data_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  report_cmd->add_option("--csv", rep.csv, "Write per-second counts as CSV ('-' for stdout)");

  ReplayArgs replay;
  auto* replay_cmd = app.add_subcommand("replay", "Re-feed a reading log through the detector");
  replay_cmd->add_option("--data-dir", replay.data_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  replay_cmd->add_option("--speed", replay.speed, "Playback speed relative to real time; 0 = as fast as possible")
      ->check(CLI::NonNegativeNumber);
  replay_cmd->add_option("--eval-period", replay.eval_period_s, "Seconds between evaluations");
  replay_cmd->add_option("--out", replay.out, "Write replayed alerts as JSON");
  replay.detector.attach(replay_cmd);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return cmd_run(run, *run_cmd);
    if (*report_cmd) return cmd_report(rep);
    if (*replay_cmd) return cmd_replay(replay);
  } catch (const std::exception& e) {
    std::cerr << "agrimon: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
