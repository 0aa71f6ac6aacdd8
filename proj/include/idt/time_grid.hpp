#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace idt {

/// Strictly increasing, nonnegative, nonempty sampling times.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times);

  /// Strictly increasing finite reals, negatives allowed. Index set of
  /// stationary (Lamperti-transformed) ensembles; samplers reject it.
  static TimeGrid real_line(std::vector<double> points);

  std::size_t size() const noexcept { return times_.size(); }
  double operator[](std::size_t i) const noexcept { return times_[i]; }
  std::span<const double> times() const noexcept { return times_; }
  auto begin() const noexcept { return times_.begin(); }
  auto end() const noexcept { return times_.end(); }

  /// Every time multiplied by `factor` (> 0).
  TimeGrid scaled(double factor) const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  TimeGrid(std::vector<double> times, bool allow_negative);

  std::vector<double> times_;
};

}  // namespace idt
