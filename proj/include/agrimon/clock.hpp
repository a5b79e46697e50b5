#pragma once

#include <atomic>

#include "agrimon/core.hpp"

namespace agrimon {

/// Simulated clocks move only when told to; wall clocks read the system time.
class Clock {
 public:
  enum class Mode { Simulated, Wall };

  static Clock simulated(Timestamp start = Timestamp(0)) { return Clock(Mode::Simulated, start); }
  static Clock wall() { return Clock(Mode::Wall, Timestamp(0)); }

  Clock(const Clock& other) : mode_(other.mode_), sim_now_(other.sim_now_.load()) {}
  Clock& operator=(const Clock& other) {
    mode_ = other.mode_;
    sim_now_.store(other.sim_now_.load());
    return *this;
  }

  Mode mode() const { return mode_; }
  Timestamp now() const;

  /// Simulated mode only; throws std::logic_error on a wall clock or when
  /// asked to move backwards.
  void advance(Duration d);
  void advance_to(Timestamp t);

 private:
  Clock(Mode mode, Timestamp start) : mode_(mode), sim_now_(start.millis()) {}

  Mode mode_;
  std::atomic<std::int64_t> sim_now_;
};

}  // namespace agrimon
