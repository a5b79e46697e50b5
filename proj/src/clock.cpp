#include "agrimon/clock.hpp"

#include <stdexcept>

namespace agrimon {

Timestamp Clock::now() const {
  if (mode_ == Mode::Wall) {
    using namespace std::chrono;
    return Timestamp(
        duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count());
  }
  return Timestamp(sim_now_.load());
}

void Clock::advance(Duration d) {
  if (d.count() < 0) throw std::logic_error("clock cannot move backwards");
  advance_to(now() + d);
}

void Clock::advance_to(Timestamp t) {
  if (mode_ != Mode::Simulated) throw std::logic_error("wall clock cannot be ticked");
  if (t.millis() < sim_now_.load()) throw std::logic_error("clock cannot move backwards");
  sim_now_.store(t.millis());
}

}  // namespace agrimon
