#include "idt/statlab.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <set>

#include "idt/errors.hpp"
#include "idt/parallel.hpp"
#include "idt/transforms.hpp"

namespace idt {

ThetaGrid default_theta_grid(std::size_t dim) {
  if (dim == 0 || dim > 3) {
    throw DomainError("θ grids support 1 to 3 marginal times");
  }
  static constexpr std::array<double, 4> kMagnitudes{0.25, 0.5, 1.0, 2.0};
  ThetaGrid grid{"m12", dim, {}};
  for (std::size_t first = 0; first < dim; ++first) {
    for (double a : kMagnitudes) {
      ThetaPoint p(dim, 0.0);
      p[first] = a;
      grid.points.push_back(p);
      for (std::size_t second = first + 1; second < dim; ++second) {
        for (double b : kMagnitudes) {
          for (double sign : {1.0, -1.0}) {
            p[second] = sign * b;
            grid.points.push_back(p);
          }
        }
        p[second] = 0.0;
      }
    }
  }
  return grid;
}

EcfEvaluation ecf(const PathEnsemble& e, std::span<const std::size_t> times,
                  const std::vector<ThetaPoint>& thetas) {
  if (thetas.empty()) throw DomainError("ecf needs at least one θ point");
  if (times.empty() || times.size() > 3) {
    throw DomainError("ecf supports 1 to 3 marginal times");
  }
  for (std::size_t t : times) {
    if (t >= e.n_times()) throw DomainError("ecf time index out of range");
  }
  const std::size_t m = times.size();
  for (const auto& th : thetas) {
    if (th.size() != m) throw DomainError("θ dimension must equal |times|");
  }

  // Each θ·x is a sum of at most three per-coordinate phases, so the
  // trigonometric work is done once per distinct |θ_d| and combined by
  // complex multiplication. Table entry 0 is 1; each magnitude j owns
  // entries 1+2j (e^{+i}) and 2+2j (its conjugate).
  std::vector<double> magnitudes;
  std::vector<std::size_t> slot_dim;
  std::vector<std::array<std::uint32_t, 3>> factors(thetas.size());
  for (std::size_t q = 0; q < thetas.size(); ++q) {
    factors[q] = {0, 0, 0};
    for (std::size_t d = 0; d < m; ++d) {
      const double v = thetas[q][d];
      if (v == 0.0) continue;
      std::size_t slot = 0;
      while (slot < magnitudes.size() &&
             !(slot_dim[slot] == d && magnitudes[slot] == std::abs(v))) {
        ++slot;
      }
      if (slot == magnitudes.size()) {
        magnitudes.push_back(std::abs(v));
        slot_dim.push_back(d);
      }
      factors[q][d] = static_cast<std::uint32_t>(1 + 2 * slot + (v < 0.0));
    }
  }

  constexpr std::size_t kBlock = 512;
  const std::size_t n = e.n_paths();
  const std::size_t n_blocks = (n + kBlock - 1) / kBlock;
  const std::size_t k = thetas.size();
  const std::size_t n_slots = magnitudes.size();
  std::vector<double> re(n_blocks * k, 0.0);
  std::vector<double> im(n_blocks * k, 0.0);

  parallel::for_ranges(n_blocks, [&](std::size_t b0, std::size_t b1) {
    std::vector<double> tr(1 + 2 * n_slots, 1.0), ti(1 + 2 * n_slots, 0.0);
    for (std::size_t b = b0; b < b1; ++b) {
      double* bre = re.data() + b * k;
      double* bim = im.data() + b * k;
      const std::size_t end = std::min(n, (b + 1) * kBlock);
      for (std::size_t p = b * kBlock; p < end; ++p) {
        for (std::size_t j = 0; j < n_slots; ++j) {
          const double phase = magnitudes[j] * e.at(p, times[slot_dim[j]]);
          const double c = std::cos(phase);
          const double s = std::sin(phase);
          tr[1 + 2 * j] = c;
          ti[1 + 2 * j] = s;
          tr[2 + 2 * j] = c;
          ti[2 + 2 * j] = -s;
        }
        for (std::size_t q = 0; q < k; ++q) {
          const auto [f0, f1, f2] = factors[q];
          const double ar = tr[f0] * tr[f1] - ti[f0] * ti[f1];
          const double ai = tr[f0] * ti[f1] + ti[f0] * tr[f1];
          bre[q] += ar * tr[f2] - ai * ti[f2];
          bim[q] += ar * ti[f2] + ai * tr[f2];
        }
      }
    }
  });

  EcfEvaluation out;
  out.times.assign(times.begin(), times.end());
  out.theta_points = thetas;
  out.n_samples = n;
  out.values.resize(k);
  const double count = static_cast<double>(n);
  for (std::size_t q = 0; q < k; ++q) {
    double sr = 0.0, si = 0.0;
    for (std::size_t b = 0; b < n_blocks; ++b) {
      sr += re[b * k + q];
      si += im[b * k + q];
    }
    out.values[q] = {sr / count, si / count};
  }
  return out;
}

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // Jacobi theta form, converges fast for small λ.
    constexpr double pi = std::numbers::pi;
    const double y = std::exp(-pi * pi / (8.0 * lambda * lambda));
    double sum = 0.0;
    for (int k = 1; k <= 8; ++k) {
      sum += std::pow(y, static_cast<double>((2 * k - 1) * (2 * k - 1)));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term =
        std::exp(-2.0 * k * k * lambda * lambda) * (k % 2 == 1 ? 1.0 : -1.0);
    sum += term;
    if (std::abs(term) < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw DomainError("ks_two_sample needs two nonempty samples");
  }
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx -
                             static_cast<double>(j) / ny));
  }
  const double ne = nx * ny / (nx + ny);
  return {d, kolmogorov_survival(std::sqrt(ne) * d)};
}

KsResult ks_one_sample(std::span<const double> sample,
                       const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("ks_one_sample needs a sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n,
                  static_cast<double>(i + 1) / n - f});
  }
  return {d, kolmogorov_survival(std::sqrt(n) * d)};
}

EcfSetup EcfSetup::standard(TimeGrid grid, std::size_t n_paths) {
  const std::size_t m = std::min<std::size_t>(grid.size(), 3);
  std::vector<std::size_t> times(m);
  for (std::size_t i = 0; i < m; ++i) times[i] = i;
  return EcfSetup{std::move(grid), std::move(times), default_theta_grid(m),
                  n_paths};
}

std::string EcfSetup::theta_grid_id() const {
  std::string out = thetas.id + "@grid=[";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0) out += ",";
    out += format_double(grid[i]);
  }
  out += "];times=[";
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(times[i]);
  }
  return out + "]";
}

namespace {

void check_setup(const EcfSetup& s) {
  if (s.n_paths == 0) throw DomainError("n_paths must be >= 1");
  if (s.times.empty() || s.times.size() > 3) {
    throw DomainError("marginal subsets need 1 to 3 times");
  }
  std::set<std::size_t> seen;
  for (std::size_t t : s.times) {
    if (t >= s.grid.size()) throw DomainError("marginal index out of range");
    if (!seen.insert(t).second) throw DomainError("duplicate marginal index");
  }
  if (s.thetas.dim != s.times.size()) {
    throw DomainError("θ grid dimension must equal the marginal count");
  }
}

std::complex<double> ipow(std::complex<double> z, int n) {
  std::complex<double> r = 1.0;
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

std::map<std::string, std::string> setup_details(const ProcessSpec& spec,
                                                 const EcfSetup& s) {
  return {{"spec", spec.describe()},
          {"theta_grid", s.theta_grid_id()},
          {"theta_points", std::to_string(s.thetas.points.size())}};
}

/// max_q |lhs_q - rhs_q| and the arg max.
std::pair<double, std::size_t> max_gap(
    const std::vector<std::complex<double>>& lhs,
    const std::vector<std::complex<double>>& rhs) {
  double worst = 0.0;
  std::size_t where = 0;
  for (std::size_t q = 0; q < lhs.size(); ++q) {
    const double gap = std::abs(lhs[q] - rhs[q]);
    if (gap > worst) {
      worst = gap;
      where = q;
    }
  }
  return {worst, where};
}

std::string format_point(const ThetaPoint& p) {
  std::string out = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i > 0) out += ",";
    out += format_double(p[i]);
  }
  return out + ")";
}

}  // namespace

TestReport idt_test(const ProcessSpec& spec, double alpha, int n,
                    const EcfSetup& setup, const RngState& rng,
                    double threshold, IdtMode mode) {
  if (n < 2) throw DomainError("idt_test needs n >= 2");
  if (!(alpha > 0.0)) throw DomainError("idt_test needs alpha > 0");
  check_setup(setup);
  const double dilation = std::pow(static_cast<double>(n), 1.0 / alpha);
  const auto dilated = generate(spec, setup.grid.scaled(dilation),
                                setup.n_paths, rng.split(1));
  const auto lhs = ecf(dilated, setup.times, setup.thetas.points);

  std::vector<std::complex<double>> rhs;
  if (mode == IdtMode::kPower) {
    const auto base = generate(spec, setup.grid, setup.n_paths, rng.split(2));
    for (const auto& v : ecf(base, setup.times, setup.thetas.points).values) {
      rhs.push_back(ipow(v, n));
    }
  } else {
    const auto summed = sum_independent(spec, static_cast<std::size_t>(n),
                                        setup.grid, setup.n_paths,
                                        rng.split(2));
    rhs = ecf(summed, setup.times, setup.thetas.points).values;
  }
  const auto [stat, where] = max_gap(lhs.values, rhs);
  auto details = setup_details(spec, setup);
  details["alpha"] = format_double(alpha);
  details["n"] = std::to_string(n);
  details["mode"] = mode == IdtMode::kPower ? "power" : "sum";
  details["argmax_theta"] = format_point(setup.thetas.points[where]);
  return TestReport::make("idt_test", stat, threshold, Decision::kDistance,
                          setup.n_paths, rng.seed(), std::move(details));
}

TestReport selfsimilarity_test(const ProcessSpec& spec, double h, double a,
                               const EcfSetup& setup, const RngState& rng,
                               double threshold) {
  if (!(a > 0.0) || a == 1.0) {
    throw DomainError("selfsimilarity_test needs a > 0 and a != 1");
  }
  check_setup(setup);
  const auto dilated =
      generate(spec, setup.grid.scaled(a), setup.n_paths, rng.split(1));
  const auto scaled = scale_paths(
      generate(spec, setup.grid, setup.n_paths, rng.split(2)), std::pow(a, h));
  const auto [stat, where] =
      max_gap(ecf(dilated, setup.times, setup.thetas.points).values,
              ecf(scaled, setup.times, setup.thetas.points).values);
  auto details = setup_details(spec, setup);
  details["h"] = format_double(h);
  details["a"] = format_double(a);
  details["argmax_theta"] = format_point(setup.thetas.points[where]);
  return TestReport::make("selfsimilarity_test", stat, threshold,
                          Decision::kDistance, setup.n_paths, rng.seed(),
                          std::move(details));
}

TestReport stability_test(const ProcessSpec& spec, double beta, int n,
                          const EcfSetup& setup, const RngState& rng,
                          double threshold) {
  if (n < 2) throw DomainError("stability_test needs n >= 2");
  if (!(beta > 0.0)) throw DomainError("stability_test needs beta > 0");
  check_setup(setup);
  const auto summed = sum_independent(spec, static_cast<std::size_t>(n),
                                      setup.grid, setup.n_paths, rng.split(1));
  const auto scaled = scale_paths(
      generate(spec, setup.grid, setup.n_paths, rng.split(2)),
      std::pow(static_cast<double>(n), 1.0 / beta));
  const auto [stat, where] =
      max_gap(ecf(summed, setup.times, setup.thetas.points).values,
              ecf(scaled, setup.times, setup.thetas.points).values);
  auto details = setup_details(spec, setup);
  details["beta"] = format_double(beta);
  details["n"] = std::to_string(n);
  details["argmax_theta"] = format_point(setup.thetas.points[where]);
  return TestReport::make("stability_test", stat, threshold,
                          Decision::kDistance, setup.n_paths, rng.seed(),
                          std::move(details));
}

TestReport temporal_sd_test(const ProcessSpec& spec, double alpha, double b,
                            const EcfSetup& setup, const RngState& rng,
                            double threshold) {
  if (!(b > 0.0 && b < 1.0)) {
    throw DomainError("temporal_sd_test needs b in (0, 1)");
  }
  if (!(alpha > 0.0)) throw DomainError("temporal_sd_test needs alpha > 0");
  check_setup(setup);
  const auto& th = setup.thetas.points;
  const auto whole = generate(spec, setup.grid, setup.n_paths, rng.split(1));
  const auto part = generate(spec, setup.grid.scaled(std::pow(b, 1.0 / alpha)),
                             setup.n_paths, rng.split(2));
  const auto rest =
      generate(spec, setup.grid.scaled(std::pow(1.0 - b, 1.0 / alpha)),
               setup.n_paths, rng.split(3));
  const auto phi = ecf(whole, setup.times, th).values;
  const auto phi_part = ecf(part, setup.times, th).values;
  const auto phi_rest = ecf(rest, setup.times, th).values;
  std::vector<std::complex<double>> product(phi.size());
  for (std::size_t q = 0; q < phi.size(); ++q) {
    product[q] = phi_part[q] * phi_rest[q];
  }
  const auto [stat, where] = max_gap(phi, product);
  auto details = setup_details(spec, setup);
  details["alpha"] = format_double(alpha);
  details["b"] = format_double(b);
  details["residual_scale_c"] = format_double(std::pow(b, 1.0 / alpha));
  details["argmax_theta"] = format_point(th[where]);
  return TestReport::make("temporal_sd_test", stat, threshold,
                          Decision::kDistance, setup.n_paths, rng.seed(),
                          std::move(details));
}

TestReport stationarity_test(const PathEnsemble& e, std::size_t window,
                             std::size_t shift, const ThetaGrid& thetas,
                             double threshold) {
  if (window == 0 || window > 3) {
    throw DomainError("stationarity window must hold 1 to 3 columns");
  }
  if (window + shift > e.n_times()) {
    throw DomainError("stationarity window + shift exceeds the grid");
  }
  if (thetas.dim != window) {
    throw DomainError("θ grid dimension must equal the window");
  }
  const auto& g = e.grid();
  if (g.size() > 2) {
    const double step = g[1] - g[0];
    for (std::size_t i = 2; i < g.size(); ++i) {
      if (std::abs((g[i] - g[i - 1]) - step) > 1e-9 * std::max(1.0, std::abs(step))) {
        throw ContractError("stationarity_test needs a uniform grid");
      }
    }
  }
  std::vector<std::size_t> first(window), second(window);
  for (std::size_t i = 0; i < window; ++i) {
    first[i] = i;
    second[i] = i + shift;
  }
  const auto [stat, where] = max_gap(ecf(e, first, thetas.points).values,
                                     ecf(e, second, thetas.points).values);
  std::map<std::string, std::string> details{
      {"window", std::to_string(window)},
      {"shift", std::to_string(shift)},
      {"theta_grid", thetas.id},
      {"argmax_theta", format_point(thetas.points[where])},
      {"provenance", e.provenance()}};
  if (e.spec()) details["spec"] = e.spec()->describe();
  return TestReport::make("stationarity_test", stat, threshold,
                          Decision::kDistance, e.n_paths(), e.seed(),
                          std::move(details));
}

TestReport association_test(const ProcessSpec& spec, const LevyFamily& f,
                            double alpha, const std::vector<double>& t_list,
                            std::size_t n_paths, const RngState& rng,
                            double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("association level must lie in (0, 1)");
  }
  const TimeGrid grid(t_list);
  const auto process = generate(spec, grid, n_paths, rng.split(1));
  const auto additive = additive_paths(f, alpha, grid, n_paths, rng.split(2));
  const double per_time = level / static_cast<double>(grid.size());
  double min_p = 1.0;
  std::map<std::string, std::string> details{
      {"spec", spec.describe()},
      {"levy", describe(f)},
      {"alpha", format_double(alpha)},
      {"level", format_double(level)},
      {"correction", "bonferroni"}};
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto ks = ks_two_sample(process.column(j), additive.column(j));
    details["p_value@t=" + format_double(grid[j])] = format_double(ks.p_value);
    details["ks_statistic@t=" + format_double(grid[j])] =
        format_double(ks.statistic);
    min_p = std::min(min_p, ks.p_value);
  }
  return TestReport::make("association_test", min_p, per_time,
                          Decision::kPValue, n_paths, rng.seed(),
                          std::move(details));
}

Eigen::MatrixXd cov_estimate(const PathEnsemble& e) {
  if (e.n_paths() < 2) throw DomainError("cov_estimate needs N >= 2");
  const std::size_t m = e.n_times();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                            static_cast<Eigen::Index>(m));
  for (std::size_t p = 0; p < e.n_paths(); ++p) {
    const auto row = e.path(p);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
            row[i] * row[j];
      }
    }
  }
  c /= static_cast<double>(e.n_paths());
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) c(j, i) = c(i, j);
  }
  return c;
}

}  // namespace idt
