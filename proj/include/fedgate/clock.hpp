#pragma once

#include <atomic>
#include <chrono>

namespace fedgate {

/// Seconds since the owning clock's epoch.
using Seconds = std::chrono::duration<double>;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Seconds now() const = 0;
};

/// Moves only when told to. Used by tests and the embedded bench.
class VirtualClock final : public Clock {
 public:
  Seconds now() const override {
    return Seconds(now_.load(std::memory_order_acquire));
  }
  /// Never moves backwards; earlier targets are ignored.
  void advance_to(Seconds t) {
    double cur = now_.load(std::memory_order_acquire);
    while (t.count() > cur &&
           !now_.compare_exchange_weak(cur, t.count(),
                                       std::memory_order_acq_rel)) {
    }
  }
  void advance(Seconds dt) { advance_to(now() + dt); }

 private:
  std::atomic<double> now_{0.0};
};

/// Wall time since construction, optionally sped up so simulated queries
/// finish sooner than they would in real time.
class RealtimeClock final : public Clock {
 public:
  explicit RealtimeClock(double speedup = 1.0)
      : start_(std::chrono::steady_clock::now()), speedup_(speedup) {}
  Seconds now() const override {
    return std::chrono::duration_cast<Seconds>(
               std::chrono::steady_clock::now() - start_) *
           speedup_;
  }

 private:
  std::chrono::steady_clock::time_point start_;
  double speedup_;
};

} // namespace fedgate
