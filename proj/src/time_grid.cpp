#include "idt/time_grid.hpp"

#include <cmath>
#include <string>

#include "idt/errors.hpp"

namespace idt {

TimeGrid::TimeGrid(std::vector<double> times)
    : TimeGrid(std::move(times), false) {}

TimeGrid TimeGrid::real_line(std::vector<double> points) {
  return TimeGrid(std::move(points), true);
}

TimeGrid::TimeGrid(std::vector<double> times, bool allow_negative)
    : times_(std::move(times)) {
  if (times_.empty()) throw DomainError("time grid must be nonempty");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || (times_[i] < 0.0 && !allow_negative)) {
      throw DomainError("time grid entry " + std::to_string(i) +
                        " must be finite and nonnegative");
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw DomainError("time grid must be strictly increasing (entry " +
                        std::to_string(i) + ")");
    }
  }
}

TimeGrid TimeGrid::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw DomainError("grid scale factor must be positive and finite");
  }
  std::vector<double> out(times_);
  for (double& t : out) t *= factor;
  return TimeGrid(std::move(out), true);
}

}  // namespace idt
