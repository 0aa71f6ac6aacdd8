#include "idt/transforms.hpp"

#include <cmath>

#include "idt/errors.hpp"

namespace idt {

namespace {

std::string chain(const PathEnsemble& e, const std::string& step) {
  return e.provenance().empty() ? step : e.provenance() + "|" + step;
}

}  // namespace

PathEnsemble lamperti_apply(const PathEnsemble& e, double alpha,
                            const std::vector<double>& y_grid) {
  if (y_grid.size() != e.n_times()) {
    throw ContractError("lamperti_apply: y grid size differs from ensemble");
  }
  std::vector<double> factor(y_grid.size());
  for (std::size_t j = 0; j < y_grid.size(); ++j) {
    const double expected = std::exp(y_grid[j]);
    const double actual = e.grid()[j];
    if (std::abs(actual - expected) > 1e-12 * std::max(1.0, expected)) {
      throw ContractError("lamperti_apply: grid time " +
                          format_double(actual) + " is not exp(" +
                          format_double(y_grid[j]) + ")");
    }
    factor[j] = std::exp(-alpha * y_grid[j] / 2.0);
  }
  std::vector<double> values(e.values());
  const std::size_t m = e.n_times();
  for (std::size_t i = 0; i < e.n_paths(); ++i) {
    for (std::size_t j = 0; j < m; ++j) values[i * m + j] *= factor[j];
  }
  return PathEnsemble(TimeGrid::real_line(y_grid), e.n_paths(), std::move(values),
                      e.spec(), e.seed(),
                      chain(e, "lamperti(alpha=" + format_double(alpha) + ")"),
                      e.jitter());
}

PathEnsemble lamperti_invert(const PathEnsemble& e, double alpha) {
  std::vector<double> times;
  std::vector<double> factor;
  for (double y : e.grid()) {
    times.push_back(std::exp(y));
    factor.push_back(std::exp(-alpha * y / 2.0));
  }
  std::vector<double> values(e.values());
  const std::size_t m = e.n_times();
  for (std::size_t i = 0; i < e.n_paths(); ++i) {
    for (std::size_t j = 0; j < m; ++j) values[i * m + j] /= factor[j];
  }
  return PathEnsemble(TimeGrid(std::move(times)), e.n_paths(),
                      std::move(values), e.spec(), e.seed(),
                      chain(e, "lamperti_inverse(alpha=" +
                                   format_double(alpha) + ")"),
                      e.jitter());
}

PathEnsemble scale_paths(const PathEnsemble& e, double c) {
  std::vector<double> values(e.values());
  for (double& v : values) v *= c;
  return PathEnsemble(e.grid(), e.n_paths(), std::move(values), e.spec(),
                      e.seed(), chain(e, "scale(" + format_double(c) + ")"),
                      e.jitter());
}

PathEnsemble dilate_grid(const PathEnsemble& e, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError("dilation factor must be positive and finite");
  }
  std::vector<double> times(e.grid().begin(), e.grid().end());
  for (double& t : times) t /= a;
  return PathEnsemble(TimeGrid::real_line(std::move(times)), e.n_paths(), e.values(),
                      e.spec(), e.seed(),
                      chain(e, "dilate(" + format_double(a) + ")"), e.jitter());
}

PathEnsemble sum_independent(const ProcessSpec& spec, std::size_t n,
                             const TimeGrid& grid, std::size_t n_paths,
                             const RngState& rng) {
  if (n == 0) throw DomainError("sum_independent needs n >= 1");
  PathEnsemble first = generate(spec, grid, n_paths, rng);
  if (n == 1) return first;
  std::vector<double> values(first.values());
  double jitter = first.jitter();
  for (std::size_t j = 1; j < n; ++j) {
    const PathEnsemble copy = generate(spec, grid, n_paths, rng.split(j));
    for (std::size_t k = 0; k < values.size(); ++k) {
      values[k] += copy.values()[k];
    }
    jitter = std::max(jitter, copy.jitter());
  }
  return PathEnsemble(grid, n_paths, std::move(values), spec, rng.seed(),
                      "sum_independent(n=" + std::to_string(n) + ")", jitter);
}

}  // namespace idt
