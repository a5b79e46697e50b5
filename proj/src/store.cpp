#include "agrimon/store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>

#include "agrimon/json_codec.hpp"

namespace agrimon {
namespace {

namespace fs = std::filesystem;

struct Key {
  std::int64_t at;
  std::uint32_t index;
  auto operator<=>(const Key&) const = default;
};

using Series = std::vector<Key>;

void insert_sorted(Series& s, Key k) {
  // Almost always an append; delayed or forged timestamps land earlier.
  if (s.empty() || s.back() < k) {
    s.push_back(k);
  } else {
    s.insert(std::upper_bound(s.begin(), s.end(), k), k);
  }
}

std::pair<Series::const_iterator, Series::const_iterator> span_of(const Series& s, Timestamp t0,
                                                                  Timestamp t1) {
  auto lo = std::lower_bound(s.begin(), s.end(), Key{t0.millis(), 0});
  auto hi = std::lower_bound(s.begin(), s.end(), Key{t1.millis(), 0});
  return {lo, hi};
}

// Append-only JSON-lines file.
class LogFile {
 public:
  LogFile() = default;
  explicit LogFile(fs::path path) : path_(std::move(path)) {}

  bool persistent() const { return !path_.empty(); }

  // Reads every complete record; truncates a torn tail.
  template <class Fn>
  void recover(Fn on_record, bool writable) {
    if (!persistent()) return;
    std::string content;
    if (fs::exists(path_)) {
      std::ifstream in(path_, std::ios::binary);
      std::ostringstream buf;
      buf << in.rdbuf();
      content = buf.str();
    }
    std::size_t good = 0;
    std::size_t line_no = 0;
    while (good < content.size()) {
      auto nl = content.find('\n', good);
      if (nl == std::string::npos) break;  // torn final record
      ++line_no;
      std::string_view line(content.data() + good, nl - good);
      try {
        on_record(Json::parse(line));
      } catch (const std::exception& e) {
        throw StoreError(path_.string() + ":" + std::to_string(line_no) + ": corrupt record (" +
                         e.what() + ")");
      }
      good = nl + 1;
    }
    if (!writable) return;
    if (good < content.size()) fs::resize_file(path_, good);
    file_ = std::fopen(path_.c_str(), "ab");
    if (!file_) throw StoreError("cannot open " + path_.string() + " for append");
  }

  void append(const Json& record) {
    if (!persistent()) return;
    if (!file_) throw StoreError(path_.string() + " is open read-only");
    std::string line = record.dump(-1, ' ', false, Json::error_handler_t::replace);
    line += '\n';
    if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0) {
      throw StoreError("write failed on " + path_.string());
    }
  }

  ~LogFile() {
    if (file_) std::fclose(file_);
  }
  LogFile(LogFile&& o) noexcept : path_(std::move(o.path_)), file_(std::exchange(o.file_, nullptr)) {}
  LogFile& operator=(LogFile&& o) noexcept {
    if (this != &o) {
      if (file_) std::fclose(file_);
      path_ = std::move(o.path_);
      file_ = std::exchange(o.file_, nullptr);
    }
    return *this;
  }

 private:
  fs::path path_;
  std::FILE* file_ = nullptr;
};

}  // namespace

struct Store::Impl {
  std::optional<fs::path> dir;
  LogFile readings_log, alerts_log, rejections_log;

  mutable std::shared_mutex mutex;
  std::vector<SensorReading> readings;  // insertion (= seq) order
  std::vector<AlertEvent> alerts;
  std::vector<Rejection> rejections;
  Series by_received;
  std::map<std::string, Series, std::less<>> by_node_received;
  std::map<std::pair<std::string, Field>, Series> by_series;
  std::map<std::pair<std::string, Field>, std::uint32_t> latest;
  std::map<std::string, Timestamp, std::less<>> last_received;
  Seq next_seq = 1;
  std::uint64_t next_alert_id = 1;

  void index(SensorReading r) {
    auto idx = static_cast<std::uint32_t>(readings.size());
    insert_sorted(by_received, {r.received_at.millis(), idx});
    insert_sorted(by_node_received[r.node_id], {r.received_at.millis(), idx});
    insert_sorted(by_series[{r.node_id, r.field}], {r.sampled_at.millis(), idx});
    latest[{r.node_id, r.field}] = idx;
    auto [it, inserted] = last_received.try_emplace(r.node_id, r.received_at);
    if (!inserted) it->second = std::max(it->second, r.received_at);
    next_seq = r.seq + 1;
    readings.push_back(std::move(r));
  }

  void recover(bool writable) {
    readings_log.recover([&](const Json& j) {
      auto r = reading_from_json(j);
      if (r.seq != next_seq) {
        throw std::runtime_error("seq " + std::to_string(r.seq) + " where " +
                                 std::to_string(next_seq) + " was expected");
      }
      index(std::move(r));
    }, writable);
    alerts_log.recover([&](const Json& j) {
      auto a = alert_from_json(j);
      if (a.alert_id < next_alert_id) throw std::runtime_error("alert ids out of order");
      next_alert_id = a.alert_id + 1;
      alerts.push_back(std::move(a));
    }, writable);
    rejections_log.recover([&](const Json& j) { rejections.push_back(rejection_from_json(j)); },
                           writable);
  }
};

Store::Store() : impl_(std::make_unique<Impl>()) {}

Store::Store(const fs::path& data_dir, Mode mode) : impl_(std::make_unique<Impl>()) {
  const bool writable = mode == Mode::ReadWrite;
  std::error_code ec;
  if (writable) {
    fs::create_directories(data_dir, ec);
    if (ec) throw StoreError("cannot create " + data_dir.string() + ": " + ec.message());
  } else if (!fs::is_directory(data_dir)) {
    throw StoreError(data_dir.string() + " is not a directory");
  }
  impl_->dir = data_dir;
  impl_->readings_log = LogFile(data_dir / "readings.log");
  impl_->alerts_log = LogFile(data_dir / "alerts.log");
  impl_->rejections_log = LogFile(data_dir / "rejections.log");
  impl_->recover(writable);
}

Store::~Store() = default;
Store::Store(Store&&) noexcept = default;
Store& Store::operator=(Store&&) noexcept = default;

const std::optional<fs::path>& Store::data_dir() const { return impl_->dir; }

Seq Store::append_reading(const SensorReading& r) {
  std::unique_lock lock(impl_->mutex);
  SensorReading stored = r;
  stored.seq = impl_->next_seq;
  impl_->readings_log.append(to_json(stored));
  impl_->index(std::move(stored));
  return impl_->next_seq - 1;
}

std::uint64_t Store::append_alert(const AlertEvent& a) {
  std::unique_lock lock(impl_->mutex);
  AlertEvent stored = a;
  stored.alert_id = impl_->next_alert_id;
  impl_->alerts_log.append(to_json(stored));
  impl_->alerts.push_back(std::move(stored));
  return impl_->next_alert_id++;
}

void Store::append_rejection(const Rejection& r) {
  std::unique_lock lock(impl_->mutex);
  impl_->rejections_log.append(to_json(r));
  impl_->rejections.push_back(r);
}

std::vector<SensorReading> Store::query_range(std::string_view node_id, Field field, Timestamp t0,
                                              Timestamp t1) const {
  std::shared_lock lock(impl_->mutex);
  std::vector<SensorReading> out;
  if (!(t0 < t1)) return out;
  auto it = impl_->by_series.find(std::pair<std::string, Field>(std::string(node_id), field));
  if (it == impl_->by_series.end()) return out;
  auto [lo, hi] = span_of(it->second, t0, t1);
  out.reserve(static_cast<std::size_t>(hi - lo));
  for (auto k = lo; k != hi; ++k) out.push_back(impl_->readings[k->index]);
  return out;
}

std::size_t Store::count_received(Timestamp t0, Timestamp t1) const {
  std::shared_lock lock(impl_->mutex);
  if (!(t0 < t1)) return 0;
  auto [lo, hi] = span_of(impl_->by_received, t0, t1);
  return static_cast<std::size_t>(hi - lo);
}

std::size_t Store::count_received(std::string_view node_id, Timestamp t0, Timestamp t1) const {
  std::shared_lock lock(impl_->mutex);
  if (!(t0 < t1)) return 0;
  auto it = impl_->by_node_received.find(node_id);
  if (it == impl_->by_node_received.end()) return 0;
  auto [lo, hi] = span_of(it->second, t0, t1);
  return static_cast<std::size_t>(hi - lo);
}

std::vector<SensorReading> Store::received_between(Timestamp t0, Timestamp t1) const {
  std::shared_lock lock(impl_->mutex);
  std::vector<SensorReading> out;
  if (!(t0 < t1)) return out;
  auto [lo, hi] = span_of(impl_->by_received, t0, t1);
  for (auto k = lo; k != hi; ++k) out.push_back(impl_->readings[k->index]);
  return out;
}

std::vector<AlertEvent> Store::query_alerts(Timestamp t0, Timestamp t1,
                                            std::optional<AlertKind> kind) const {
  std::shared_lock lock(impl_->mutex);
  std::vector<AlertEvent> out;
  for (const auto& a : impl_->alerts) {
    if (a.detected_at >= t0 && a.detected_at < t1 && (!kind || a.kind == *kind)) out.push_back(a);
  }
  return out;
}

std::vector<Rejection> Store::query_rejections(Timestamp t0, Timestamp t1) const {
  std::shared_lock lock(impl_->mutex);
  std::vector<Rejection> out;
  for (const auto& r : impl_->rejections) {
    if (r.at >= t0 && r.at < t1) out.push_back(r);
  }
  return out;
}

std::optional<SensorReading> Store::latest(std::string_view node_id, Field field) const {
  std::shared_lock lock(impl_->mutex);
  auto it = impl_->latest.find(std::pair<std::string, Field>(std::string(node_id), field));
  if (it == impl_->latest.end()) return std::nullopt;
  return impl_->readings[it->second];
}

std::optional<Timestamp> Store::last_received(std::string_view node_id) const {
  std::shared_lock lock(impl_->mutex);
  auto it = impl_->last_received.find(node_id);
  if (it == impl_->last_received.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Store::nodes() const {
  std::shared_lock lock(impl_->mutex);
  std::vector<std::string> out;
  for (const auto& [node, _] : impl_->last_received) out.push_back(node);
  return out;
}

std::vector<SensorReading> Store::all_readings() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->readings;
}

std::size_t Store::reading_count() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->readings.size();
}

std::size_t Store::alert_count() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->alerts.size();
}

std::size_t Store::rejection_count() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->rejections.size();
}

Seq Store::next_seq() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->next_seq;
}

}  // namespace agrimon
