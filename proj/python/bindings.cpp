#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "agrimon/analytics.hpp"
#include "agrimon/api.hpp"
#include "agrimon/detect.hpp"
#include "agrimon/payload.hpp"
#include "agrimon/simulation.hpp"

namespace py = pybind11;
using namespace agrimon;

namespace {

// Crossing the boundary as JSON text keeps the dict shapes identical to
// what the HTTP API serves.
py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_py(const py::handle& obj) {
  return Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

Field field_arg(const std::string& name) {
  auto f = field_from_name(name);
  if (!f) throw py::value_error("unknown field '" + name + "'");
  return *f;
}

DetectorConfig detector_arg(const std::optional<py::dict>& overrides) {
  DetectorConfig cfg;
  if (!overrides) return cfg;
  for (const auto& [k, v] : *overrides) {
    const auto key = py::str(k).cast<std::string>();
    if (!cfg.set(key, py::str(v).cast<std::string>())) throw py::key_error(key);
  }
  cfg.validate();
  return cfg;
}

py::object alert_or_none(const std::optional<AlertEvent>& a) {
  return a ? to_py(to_json(*a)) : py::object(py::none());
}

py::dict parse(const std::string& text) {
  py::dict out;
  auto r = parse_payload(text);
  out["ok"] = r.ok();
  if (r.ok()) {
    py::list values;
    for (const auto& fv : r.value().values) {
      values.append(py::make_tuple(std::string(field_name(fv.field)), fv.value));
    }
    out["values"] = values;
    out["sampled_at"] = r.value().sampled_at ? py::object(py::int_(r.value().sampled_at->millis()))
                                             : py::object(py::none());
    out["reason"] = py::none();
    out["detail"] = "";
  } else {
    out["values"] = py::list();
    out["sampled_at"] = py::none();
    out["reason"] = std::string(reason_name(r.error().reason));
    out["detail"] = r.error().detail;
  }
  return out;
}

std::string format(const std::vector<std::pair<std::string, double>>& values,
                   std::optional<std::int64_t> sampled_at) {
  std::vector<FieldValue> fv;
  for (const auto& [name, v] : values) fv.push_back({field_arg(name), v});
  std::optional<Timestamp> t;
  if (sampled_at) t = Timestamp(*sampled_at);
  return format_payload(fv, t);
}

py::dict stats_dict(const WindowStats& s) {
  py::dict d;
  d["now"] = s.now.millis();
  d["recent"] = s.recent_count;
  d["prior"] = s.prior_count;
  d["rate"] = s.rate_of_change ? py::object(py::float_(*s.rate_of_change)) : py::object(py::none());
  d["trend"] = s.trend;
  d["total"] = s.total;
  return d;
}

std::vector<AttackScenario> load_scenarios(const std::vector<std::filesystem::path>& paths,
                                           const std::vector<Section>& base, Timestamp origin) {
  auto out = scenarios_from_sections(base, origin);
  for (const auto& p : paths) {
    auto more = scenarios_from_sections(load_sections(p), origin);
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

// Store is neither copyable nor movable; hold it by pointer.
class PyStore {
 public:
  PyStore(std::optional<std::filesystem::path> dir, bool read_only)
      : store_(dir ? std::make_unique<Store>(*dir, read_only ? Store::Mode::ReadOnly
                                                             : Store::Mode::ReadWrite)
                   : std::make_unique<Store>()) {}

  Store& get() { return *store_; }

 private:
  std::unique_ptr<Store> store_;
};

py::list readings(const std::vector<SensorReading>& rs) {
  py::list out;
  for (const auto& r : rs) out.append(to_py(to_json(r)));
  return out;
}

}  // namespace

PYBIND11_MODULE(_agrimon, m) {
  m.doc() = "Sensor monitoring pipeline: payload parsing, store, detection, simulation.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<StoreError>(m, "StoreError", PyExc_RuntimeError);
  py::register_exception<RangeError>(m, "RangeError", PyExc_ValueError);

  m.attr("EARTH_RADIUS_M") = kEarthRadiusM;
  m.attr("API_SCHEMA_VERSION") = kApiSchemaVersion;

  m.def("parse_payload", &parse, py::arg("text"),
        "Parse a wire payload. Returns {ok, values, sampled_at, reason, detail}.");
  m.def("format_payload", &format, py::arg("values"), py::arg("sampled_at") = py::none());
  m.def(
      "validate_range",
      [](const std::string& field, double value) -> std::optional<std::string> {
        auto s = validate_range(field_arg(field), value);
        if (s.ok()) return std::nullopt;
        return std::string(reason_name(s.error().reason));
      },
      py::arg("field"), py::arg("value"), "None when in range, else the rejection reason.");
  m.def(
      "field_range",
      [](const std::string& field) {
        auto r = field_range(field_arg(field));
        return py::make_tuple(r.min, r.max);
      },
      py::arg("field"));
  m.def(
      "haversine_m",
      [](double lat1, double lon1, double lat2, double lon2) {
        return haversine_m({lat1, lon1}, {lat2, lon2});
      },
      py::arg("lat1"), py::arg("lon1"), py::arg("lat2"), py::arg("lon2"));

  m.def("detector_defaults", [] {
    DetectorConfig cfg;
    py::dict d;
    d["window_s"] = cfg.window_s;
    d["history_s"] = cfg.history_s;
    d["rise_threshold"] = cfg.rise_threshold;
    d["drop_threshold"] = cfg.drop_threshold;
    d["stale_timeout_s"] = cfg.stale_timeout_s;
    d["delay_threshold_s"] = cfg.delay_threshold_s;
    d["delay_min_count"] = cfg.delay_min_count;
    d["gps_interval_s"] = cfg.gps_interval_s;
    d["gps_displacement_m"] = cfg.gps_displacement_m;
    d["temp_max"] = cfg.temp_max;
    d["temp_min"] = cfg.temp_min;
    d["hum_max"] = cfg.hum_max;
    d["hum_min"] = cfg.hum_min;
    d["malformed_burst_count"] = cfg.malformed_burst_count;
    d["malformed_burst_window_s"] = cfg.malformed_burst_window_s;
    d["alert_cooldown_s"] = cfg.alert_cooldown_s;
    return d;
  });

  m.def(
      "check_volume",
      [](std::size_t recent, std::size_t prior, std::int64_t now_ms,
         std::optional<py::dict> detector) {
        return alert_or_none(
            check_volume(WindowStats::from_counts(recent, prior, Timestamp(now_ms)),
                         detector_arg(detector)));
      },
      py::arg("recent"), py::arg("prior"), py::arg("now_ms") = 0, py::arg("detector") = py::none());

  py::class_<PyStore>(m, "Store")
      .def(py::init<std::optional<std::filesystem::path>, bool>(), py::arg("data_dir") = py::none(),
           py::arg("read_only") = false)
      .def(
          "append_reading",
          [](PyStore& s, const std::string& node, const std::string& field, double value,
             std::int64_t sampled_at, std::optional<std::int64_t> received_at) {
            SensorReading r{node, field_arg(field), value, Timestamp(sampled_at),
                            Timestamp(received_at.value_or(sampled_at)), 0};
            return s.get().append_reading(r);
          },
          py::arg("node"), py::arg("field"), py::arg("value"), py::arg("sampled_at"),
          py::arg("received_at") = py::none())
      .def(
          "append_alert",
          [](PyStore& s, const py::dict& alert) {
            Json j = from_py(alert);
            if (!j.contains("alert_id")) j["alert_id"] = 0;
            return s.get().append_alert(alert_from_json(j));
          },
          py::arg("alert"))
      .def(
          "query_range",
          [](PyStore& s, const std::string& node, const std::string& field, std::int64_t t0,
             std::int64_t t1) {
            return readings(s.get().query_range(node, field_arg(field), Timestamp(t0), Timestamp(t1)));
          },
          py::arg("node"), py::arg("field"), py::arg("t0"), py::arg("t1"))
      .def(
          "count_received",
          [](PyStore& s, std::int64_t t0, std::int64_t t1, std::optional<std::string> node) {
            return node ? s.get().count_received(*node, Timestamp(t0), Timestamp(t1))
                        : s.get().count_received(Timestamp(t0), Timestamp(t1));
          },
          py::arg("t0"), py::arg("t1"), py::arg("node") = py::none())
      .def(
          "latest",
          [](PyStore& s, const std::string& node, const std::string& field) -> py::object {
            auto r = s.get().latest(node, field_arg(field));
            return r ? to_py(to_json(*r)) : py::object(py::none());
          },
          py::arg("node"), py::arg("field"))
      .def(
          "alerts",
          [](PyStore& s, std::int64_t t0, std::int64_t t1, std::optional<std::string> kind) {
            std::optional<AlertKind> k;
            if (kind) {
              k = alert_kind_from_name(*kind);
              if (!k) throw py::value_error("unknown alert kind '" + *kind + "'");
            }
            py::list out;
            for (const auto& a : s.get().query_alerts(Timestamp(t0), Timestamp(t1), k)) {
              out.append(to_py(to_json(a)));
            }
            return out;
          },
          py::arg("t0") = 0, py::arg("t1") = std::numeric_limits<std::int64_t>::max(),
          py::arg("kind") = py::none())
      .def("nodes", [](PyStore& s) { return s.get().nodes(); })
      .def("__len__", [](PyStore& s) { return s.get().reading_count(); })
      .def(
          "window_stats",
          [](PyStore& s, std::int64_t now_ms, std::optional<std::string> node,
             std::optional<py::dict> detector) {
            auto cfg = detector_arg(detector);
            return stats_dict(node ? window_stats(s.get(), *node, Timestamp(now_ms), cfg)
                                   : window_stats(s.get(), Timestamp(now_ms), cfg));
          },
          py::arg("now_ms"), py::arg("node") = py::none(), py::arg("detector") = py::none())
      .def(
          "api_get",
          [](PyStore& s, const std::string& path, const std::map<std::string, std::string>& params,
             std::int64_t now_ms, std::optional<py::dict> detector) {
            auto clock = Clock::simulated(Timestamp(now_ms));
            ApiService api(s.get(), nullptr, detector_arg(detector), clock);
            HttpRequest req;
            req.path = path;
            for (const auto& [k, v] : params) req.params.emplace(k, v);
            auto r = api.handle(req);
            return py::make_tuple(r.status, to_py(r.body));
          },
          py::arg("path"), py::arg("params") = std::map<std::string, std::string>{},
          py::arg("now_ms"), py::arg("detector") = py::none(),
          "Answer one GET of the HTTP API as of now_ms. Returns (status, body).");

  m.def(
      "run_simulation",
      [](const std::filesystem::path& config, const std::vector<std::filesystem::path>& scenarios,
         std::optional<std::uint64_t> seed, std::optional<double> duration_s,
         std::optional<std::filesystem::path> data_dir) {
        auto sections = load_sections(config);
        RunConfig cfg = run_config_from_sections(sections);
        if (cfg.nodes.empty()) cfg.nodes.push_back(NodeProfile{});
        if (seed) cfg.seed = *seed;
        if (duration_s) cfg.duration_s = *duration_s;
        if (data_dir) cfg.data_dir = *data_dir;
        auto sc = load_scenarios(scenarios, sections, cfg.start);
        RunReport report;
        {
          py::gil_scoped_release release;
          report = Simulation(cfg, sc).run();
        }
        return to_py(report.to_json());
      },
      py::arg("config"), py::arg("scenarios") = std::vector<std::filesystem::path>{},
      py::arg("seed") = py::none(), py::arg("duration_s") = py::none(),
      py::arg("data_dir") = py::none(),
      "Run a simulated scenario from config files and return the report as a dict.");
}
