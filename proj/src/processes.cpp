#include "idt/processes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "idt/errors.hpp"
#include "idt/parallel.hpp"

namespace idt {

// ---------------------------------------------------------------------------
// Levy families

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void validate(const LevyFamily& f) {
  std::visit(
      Overloaded{
          [](const Brownian& b) {
            if (!(b.volatility >= 0.0) || !finite(b.volatility) ||
                !finite(b.drift)) {
              throw DomainError(
                  "Brownian volatility must be >= 0 and drift finite");
            }
          },
          [](const StableMotion& s) { StableParams(s.index, s.skew); },
          [](const GammaSubordinator& g) {
            if (!(g.shape > 0.0) || !(g.rate > 0.0) || !finite(g.shape) ||
                !finite(g.rate)) {
              throw DomainError("gamma subordinator needs shape > 0, rate > 0");
            }
          },
          [](const CompoundPoisson& c) {
            if (!(c.intensity >= 0.0) || !finite(c.intensity) ||
                !(c.jump_sd >= 0.0) || !finite(c.jump_sd) ||
                !finite(c.jump_mean)) {
              throw DomainError(
                  "compound Poisson needs intensity >= 0 and jump sd >= 0");
            }
          }},
      f);
}

bool is_nondecreasing(const LevyFamily& f) noexcept {
  return std::visit(
      Overloaded{
          [](const Brownian& b) {
            return b.volatility == 0.0 && b.drift >= 0.0;
          },
          [](const StableMotion& s) { return s.skew == 1.0 && s.index < 1.0; },
          [](const GammaSubordinator&) { return true; },
          [](const CompoundPoisson& c) {
            return c.intensity == 0.0 ||
                   (c.jump_sd == 0.0 && c.jump_mean >= 0.0);
          }},
      f);
}

std::string describe(const LevyFamily& f) {
  return std::visit(
      Overloaded{
          [](const Brownian& b) {
            return "Brownian(sigma=" + format_double(b.volatility) +
                   ",b=" + format_double(b.drift) + ")";
          },
          [](const StableMotion& s) {
            return "StableMotion(index=" + format_double(s.index) +
                   ",skew=" + format_double(s.skew) + ")";
          },
          [](const GammaSubordinator& g) {
            return "Gamma(shape=" + format_double(g.shape) +
                   ",rate=" + format_double(g.rate) + ")";
          },
          [](const CompoundPoisson& c) {
            return "CompoundPoisson(lambda=" + format_double(c.intensity) +
                   ",mean=" + format_double(c.jump_mean) +
                   ",sd=" + format_double(c.jump_sd) + ")";
          }},
      f);
}

double levy_increment(const LevyFamily& f, double dt, RngState& rng) {
  if (!(dt >= 0.0)) throw DomainError("increment duration must be >= 0");
  if (dt == 0.0) return 0.0;
  return std::visit(
      Overloaded{
          [&](const Brownian& b) {
            if (b.volatility == 0.0) return b.drift * dt;
            return b.drift * dt + b.volatility * std::sqrt(dt) *
                                      sample_normal(rng);
          },
          [&](const StableMotion& s) {
            return std::pow(dt, 1.0 / s.index) *
                   sample_stable(rng, StableParams(s.index, s.skew));
          },
          [&](const GammaSubordinator& g) {
            return sample_gamma(rng, g.shape * dt, g.rate);
          },
          [&](const CompoundPoisson& c) {
            const auto jumps = sample_poisson(rng, c.intensity * dt);
            if (jumps == 0) return 0.0;
            const auto k = static_cast<double>(jumps);
            if (c.jump_sd == 0.0) return c.jump_mean * k;
            return c.jump_mean * k +
                   c.jump_sd * std::sqrt(k) * sample_normal(rng);
          }},
      f);
}

std::vector<double> levy_increments(const LevyFamily& f,
                                    std::span<const double> dt_list,
                                    RngState& rng) {
  validate(f);
  for (double dt : dt_list) {
    if (!(dt >= 0.0)) throw DomainError("increment duration must be >= 0");
  }
  std::vector<double> out;
  out.reserve(dt_list.size());
  for (double dt : dt_list) out.push_back(levy_increment(f, dt, rng));
  return out;
}

void subordinate(const LevyFamily& f, std::span<const double> chrono_path,
                 RngState& rng, std::span<double> out) {
  double prev_time = 0.0;
  double level = 0.0;
  for (std::size_t i = 0; i < chrono_path.size(); ++i) {
    const double xi = chrono_path[i];
    if (!(xi >= prev_time)) {
      throw ContractError("chronometer decreases (or is negative) at grid "
                          "index " + std::to_string(i));
    }
    level += levy_increment(f, xi - prev_time, rng);
    out[i] = level;
    prev_time = xi;
  }
}

// ---------------------------------------------------------------------------
// Specs

namespace {

void check_atoms(const std::vector<TimeAtom>& atoms, bool nonnegative) {
  if (atoms.empty()) throw DomainError("atom list must be nonempty");
  for (const auto& a : atoms) {
    if (!(a.u > 0.0) || !finite(a.u) || !finite(a.weight)) {
      throw DomainError("atoms need u > 0 and finite weights");
    }
    if (nonnegative && a.weight < 0.0) {
      throw DomainError("atom weights must be nonnegative here");
    }
  }
}

std::string describe_atoms(const std::vector<TimeAtom>& atoms) {
  std::string out = "[";
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i > 0) out += ",";
    out += "(" + format_double(atoms[i].u) + "," +
           format_double(atoms[i].weight) + ")";
  }
  return out + "]";
}

}  // namespace

ProcessSpec ProcessSpec::stable_line(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw DomainError("StableLine needs alpha in (0, 2]");
  }
  return ProcessSpec(StableLine{alpha}, alpha);
}

ProcessSpec ProcessSpec::power_line(double alpha) {
  if (!(alpha > 0.0) || !finite(alpha)) {
    throw DomainError("PowerLine needs alpha > 0");
  }
  return ProcessSpec(PowerLine{alpha}, alpha);
}

ProcessSpec ProcessSpec::gaussian(Kernel k) {
  const double exponent = k.scaling_exponent();
  return ProcessSpec(GaussianKernel{std::move(k)}, exponent);
}

ProcessSpec ProcessSpec::additive(LevyFamily f, double alpha) {
  validate(f);
  if (!(alpha > 0.0) || !finite(alpha)) {
    throw DomainError("time-change exponent must be > 0");
  }
  return ProcessSpec(AdditiveTimeChange{std::move(f), alpha}, alpha);
}

ProcessSpec ProcessSpec::subordinated(LevyFamily f, ProcessSpec chrono) {
  validate(f);
  if (!chrono.is_chronometer()) {
    throw DomainError("subordination needs a nondecreasing chronometer, got " +
                      chrono.describe());
  }
  const double exponent = chrono.idt_exponent();
  return ProcessSpec(
      Subordinated{std::move(f),
                   std::make_shared<const ProcessSpec>(std::move(chrono))},
      exponent);
}

ProcessSpec ProcessSpec::mixture(ProcessSpec base, std::vector<TimeAtom> atoms) {
  check_atoms(atoms, false);
  const double exponent = base.idt_exponent();
  return ProcessSpec(
      Mixture{std::make_shared<const ProcessSpec>(std::move(base)),
              std::move(atoms)},
      exponent);
}

ProcessSpec ProcessSpec::phi_functional(LevyFamily sub,
                                        std::vector<TimeAtom> atoms,
                                        double alpha) {
  validate(sub);
  if (!is_nondecreasing(sub)) {
    throw DomainError("phi functional needs a subordinator, got " +
                      idt::describe(sub));
  }
  check_atoms(atoms, true);
  if (!(alpha > 0.0) || !finite(alpha)) {
    throw DomainError("phi functional exponent must be > 0");
  }
  return ProcessSpec(PhiFunctional{std::move(sub), std::move(atoms), alpha},
                     alpha);
}

bool ProcessSpec::is_chronometer() const noexcept {
  return std::visit(
      Overloaded{
          [](const AdditiveTimeChange& a) {
            return is_nondecreasing(a.family);
          },
          [](const Subordinated& s) { return is_nondecreasing(s.family); },
          [](const Mixture& m) {
            return m.base->is_chronometer() &&
                   std::all_of(m.atoms.begin(), m.atoms.end(),
                               [](const TimeAtom& a) { return a.weight >= 0.0; });
          },
          [](const PhiFunctional&) { return true; },
          [](const auto&) { return false; }},
      v_);
}

std::string ProcessSpec::describe() const {
  return std::visit(
      Overloaded{
          [](const StableLine& s) {
            return "StableLine(alpha=" + format_double(s.alpha) + ")";
          },
          [](const PowerLine& p) {
            return "PowerLine(alpha=" + format_double(p.alpha) + ")";
          },
          [](const GaussianKernel& g) {
            return "Gaussian(" + g.kernel.describe() + ")";
          },
          [](const AdditiveTimeChange& a) {
            return "Additive(" + idt::describe(a.family) +
                   ",alpha=" + format_double(a.alpha) + ")";
          },
          [](const Subordinated& s) {
            return "Subordinated(" + idt::describe(s.family) +
                   ",chrono=" + s.chrono->describe() + ")";
          },
          [](const Mixture& m) {
            return "Mixture(base=" + m.base->describe() +
                   ",atoms=" + describe_atoms(m.atoms) + ")";
          },
          [](const PhiFunctional& p) {
            return "PhiFunctional(" + idt::describe(p.subordinator) +
                   ",atoms=" + describe_atoms(p.atoms) +
                   ",alpha=" + format_double(p.alpha) + ")";
          }},
      v_);
}

// ---------------------------------------------------------------------------
// Ensembles

PathEnsemble::PathEnsemble(TimeGrid grid, std::size_t n_paths,
                           std::vector<double> values,
                           std::optional<ProcessSpec> spec, std::uint64_t seed,
                           std::string provenance, double jitter)
    : grid_(std::move(grid)),
      n_paths_(n_paths),
      values_(std::move(values)),
      spec_(std::move(spec)),
      seed_(seed),
      provenance_(std::move(provenance)),
      jitter_(jitter) {
  if (n_paths_ == 0) throw DomainError("an ensemble needs at least one path");
  if (values_.size() != n_paths_ * grid_.size()) {
    throw ContractError("ensemble value count does not match paths x times");
  }
}

std::vector<double> PathEnsemble::column(std::size_t col) const {
  std::vector<double> out(n_paths_);
  for (std::size_t i = 0; i < n_paths_; ++i) out[i] = at(i, col);
  return out;
}

MergedTimes merge_times(const std::vector<double>& times) {
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return times[a] < times[b];
  });
  MergedTimes out;
  out.index.resize(times.size());
  for (std::size_t k : order) {
    const double t = times[k];
    if (out.times.empty() ||
        t > out.times.back() + 1e-12 * std::max(1.0, out.times.back())) {
      out.times.push_back(t);
    }
    out.index[k] = out.times.size() - 1;
  }
  return out;
}

namespace {

class StableLineSampler final : public PathSampler {
 public:
  StableLineSampler(double alpha, const TimeGrid& grid)
      : params_(alpha, 0.0), times_(grid.begin(), grid.end()) {}
  void sample(RngState& rng, std::span<double> out) const override {
    const double s = sample_stable(rng, params_);
    for (std::size_t i = 0; i < times_.size(); ++i) {
      out[i] = times_[i] == 0.0 ? 0.0 : times_[i] * s;
    }
  }

 private:
  StableParams params_;
  std::vector<double> times_;
};

class PowerLineSampler final : public PathSampler {
 public:
  PowerLineSampler(double alpha, const TimeGrid& grid) : cauchy_(1.0, 0.0) {
    for (double t : grid) scales_.push_back(std::pow(t, alpha));
  }
  void sample(RngState& rng, std::span<double> out) const override {
    const double s = sample_stable(rng, cauchy_);
    for (std::size_t i = 0; i < scales_.size(); ++i) {
      out[i] = scales_[i] == 0.0 ? 0.0 : scales_[i] * s;
    }
  }

 private:
  StableParams cauchy_;
  std::vector<double> scales_;
};

/// Exact joint Gaussian sampling through a lower-triangular factor of the
/// covariance restricted to the grid points with positive variance.
class GaussianSampler final : public PathSampler {
 public:
  GaussianSampler(const Kernel& k, const TimeGrid& grid) : n_(grid.size()) {
    std::vector<double> active_times;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (k(grid[i], grid[i]) > 0.0) {
        active_.push_back(i);
        active_times.push_back(grid[i]);
      }
    }
    if (active_.empty()) return;
    const Eigen::MatrixXd cov = cov_matrix(k, TimeGrid(active_times));
    const auto m = cov.rows();
    const double base_jitter = 1e-12 * cov.trace() / static_cast<double>(m);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    double jitter = 0.0;
    for (int attempt = 0; llt.info() != Eigen::Success; ++attempt) {
      if (attempt == 3) {
        throw NumericalError("covariance factorization failed after maximal "
                             "jitter " + format_double(jitter));
      }
      jitter = attempt == 0 ? base_jitter : jitter * 10.0;
      llt.compute(cov + jitter * Eigen::MatrixXd::Identity(m, m));
    }
    jitter_ = jitter;
    const Eigen::MatrixXd lower = llt.matrixL();
    factor_.resize(static_cast<std::size_t>(m * (m + 1) / 2));
    std::size_t pos = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) factor_[pos++] = lower(i, j);
    }
  }

  void sample(RngState& rng, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t m = active_.size();
    if (m == 0) return;
    thread_local std::vector<double> z;
    z.resize(m);
    for (auto& v : z) v = sample_normal(rng);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j <= i; ++j) acc += factor_[pos++] * z[j];
      out[active_[i]] = acc;
    }
  }

  double jitter() const noexcept override { return jitter_; }

 private:
  std::size_t n_;
  std::vector<std::size_t> active_;
  std::vector<double> factor_;
  double jitter_ = 0.0;
};

/// Levy path sampled at a nondecreasing list of clock readings.
class LevyClockSampler final : public PathSampler {
 public:
  LevyClockSampler(LevyFamily f, std::vector<double> clock)
      : family_(std::move(f)) {
    double prev = 0.0;
    for (double c : clock) {
      dts_.push_back(c - prev);
      prev = c;
    }
  }
  void sample(RngState& rng, std::span<double> out) const override {
    double level = 0.0;
    for (std::size_t i = 0; i < dts_.size(); ++i) {
      level += levy_increment(family_, dts_[i], rng);
      out[i] = level;
    }
  }

 private:
  LevyFamily family_;
  std::vector<double> dts_;
};

class SubordinatedSampler final : public PathSampler {
 public:
  SubordinatedSampler(LevyFamily f, const ProcessSpec& chrono,
                      const TimeGrid& grid)
      : family_(std::move(f)), chrono_(make_sampler(chrono, grid)),
        n_(grid.size()) {}
  void sample(RngState& rng, std::span<double> out) const override {
    thread_local std::vector<double> xi;
    xi.resize(n_);
    chrono_->sample(rng, xi);
    subordinate(family_, xi, rng, out);
  }

 private:
  LevyFamily family_;
  std::unique_ptr<PathSampler> chrono_;
  std::size_t n_;
};

/// out[i] = sum_j weights[j] * inner[index[i * n_atoms + j]] for an inner
/// path drawn on the merged evaluation grid.
class WeightedSumSampler final : public PathSampler {
 public:
  WeightedSumSampler(std::unique_ptr<PathSampler> inner, std::size_t inner_size,
                     std::vector<std::size_t> index, std::vector<double> weights,
                     std::size_t n_out)
      : inner_(std::move(inner)), inner_size_(inner_size),
        index_(std::move(index)), weights_(std::move(weights)), n_out_(n_out) {}

  void sample(RngState& rng, std::span<double> out) const override {
    thread_local std::vector<double> buf;
    buf.resize(inner_size_);
    inner_->sample(rng, buf);
    const std::size_t n_atoms = weights_.size();
    for (std::size_t i = 0; i < n_out_; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n_atoms; ++j) {
        acc += weights_[j] * buf[index_[i * n_atoms + j]];
      }
      out[i] = acc;
    }
  }

  double jitter() const noexcept override { return inner_->jitter(); }

 private:
  std::unique_ptr<PathSampler> inner_;
  std::size_t inner_size_;
  std::vector<std::size_t> index_;
  std::vector<double> weights_;
  std::size_t n_out_;
};

/// Evaluation points (u_j t_i)^power for every grid time and atom, laid out
/// time-major, plus the atom weights.
std::pair<MergedTimes, std::vector<double>> product_grid(
    const TimeGrid& grid, const std::vector<TimeAtom>& atoms, double power) {
  std::vector<double> points;
  points.reserve(grid.size() * atoms.size());
  for (double t : grid) {
    for (const auto& a : atoms) {
      points.push_back(power == 1.0 ? a.u * t : std::pow(a.u * t, power));
    }
  }
  std::vector<double> weights;
  for (const auto& a : atoms) weights.push_back(a.weight);
  return {merge_times(points), std::move(weights)};
}

}  // namespace

std::unique_ptr<PathSampler> make_sampler(const ProcessSpec& spec,
                                          const TimeGrid& grid) {
  if (grid[0] < 0.0) throw DomainError("sampling times must be nonnegative");
  return std::visit(
      Overloaded{
          [&](const StableLine& s) -> std::unique_ptr<PathSampler> {
            return std::make_unique<StableLineSampler>(s.alpha, grid);
          },
          [&](const PowerLine& p) -> std::unique_ptr<PathSampler> {
            return std::make_unique<PowerLineSampler>(p.alpha, grid);
          },
          [&](const GaussianKernel& g) -> std::unique_ptr<PathSampler> {
            return std::make_unique<GaussianSampler>(g.kernel, grid);
          },
          [&](const AdditiveTimeChange& a) -> std::unique_ptr<PathSampler> {
            std::vector<double> clock;
            for (double t : grid) {
              clock.push_back(a.alpha == 1.0 ? t : std::pow(t, a.alpha));
            }
            return std::make_unique<LevyClockSampler>(a.family,
                                                      std::move(clock));
          },
          [&](const Subordinated& s) -> std::unique_ptr<PathSampler> {
            return std::make_unique<SubordinatedSampler>(s.family, *s.chrono,
                                                         grid);
          },
          [&](const Mixture& m) -> std::unique_ptr<PathSampler> {
            auto [merged, weights] = product_grid(grid, m.atoms, 1.0);
            const std::size_t inner_size = merged.times.size();
            auto inner = make_sampler(*m.base, TimeGrid(merged.times));
            return std::make_unique<WeightedSumSampler>(
                std::move(inner), inner_size, std::move(merged.index),
                std::move(weights), grid.size());
          },
          [&](const PhiFunctional& p) -> std::unique_ptr<PathSampler> {
            auto [merged, weights] = product_grid(grid, p.atoms, p.alpha);
            const std::size_t inner_size = merged.times.size();
            auto inner = std::make_unique<LevyClockSampler>(
                p.subordinator, merged.times);
            return std::make_unique<WeightedSumSampler>(
                std::move(inner), inner_size, std::move(merged.index),
                std::move(weights), grid.size());
          }},
      spec.variant());
}

namespace {

std::vector<double> run_paths(const PathSampler& sampler, std::size_t n_times,
                              std::size_t n_paths, std::uint64_t seed) {
  std::vector<double> values(n_paths * n_times);
  parallel::for_ranges(n_paths, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RngState rng(seed, i);
      try {
        sampler.sample(rng, std::span<double>(values.data() + i * n_times,
                                              n_times));
      } catch (const ContractError& e) {
        throw ContractError("path " + std::to_string(i) + ": " + e.what());
      }
    }
  });
  return values;
}

void require_paths(std::size_t n_paths) {
  if (n_paths == 0) throw DomainError("n_paths must be >= 1");
}

}  // namespace

PathEnsemble generate(const ProcessSpec& spec, const TimeGrid& grid,
                      std::size_t n_paths, const RngState& rng) {
  require_paths(n_paths);
  const auto sampler = make_sampler(spec, grid);
  auto values = run_paths(*sampler, grid.size(), n_paths, rng.seed());
  return PathEnsemble(grid, n_paths, std::move(values), spec, rng.seed(), {},
                      sampler->jitter());
}

PathEnsemble gaussian_paths(const Kernel& k, const TimeGrid& grid,
                            std::size_t n_paths, const RngState& rng) {
  return generate(ProcessSpec::gaussian(k), grid, n_paths, rng);
}

PathEnsemble additive_paths(const LevyFamily& f, double alpha,
                            const TimeGrid& grid, std::size_t n_paths,
                            const RngState& rng) {
  return generate(ProcessSpec::additive(f, alpha), grid, n_paths, rng);
}

PathEnsemble subordinated_paths(const LevyFamily& f, const ProcessSpec& chrono,
                                const TimeGrid& grid, std::size_t n_paths,
                                const RngState& rng) {
  return generate(ProcessSpec::subordinated(f, chrono), grid, n_paths, rng);
}

PathEnsemble phi_functional_paths(const LevyFamily& sub,
                                  const std::vector<TimeAtom>& atoms,
                                  double alpha, const TimeGrid& grid,
                                  std::size_t n_paths, const RngState& rng) {
  return generate(ProcessSpec::phi_functional(sub, atoms, alpha), grid,
                  n_paths, rng);
}

PathEnsemble gphi_paths(double hurst, const StepFunction& phi,
                        const TimeGrid& grid, std::size_t n_paths,
                        const RngState& rng) {
  require_paths(n_paths);
  const auto& br = phi.breaks;
  if (br.size() < 2 || phi.values.size() != br.size() - 1) {
    throw DomainError("phi needs at least one interval (breaks.size() == "
                      "values.size() + 1 >= 2)");
  }
  for (std::size_t k = 0; k < br.size(); ++k) {
    if (!(br[k] >= 0.0) || !finite(br[k]) || (k > 0 && !(br[k] > br[k - 1]))) {
      throw DomainError("phi breakpoints must be finite, >= 0, increasing");
    }
  }
  const Kernel kernel = Kernel::fbm(hurst);

  // fBm evaluation points t_i * b_k, time-major.
  std::vector<double> points;
  for (double t : grid) {
    for (double b : br) points.push_back(t * b);
  }
  MergedTimes merged = merge_times(points);
  const std::size_t inner_size = merged.times.size();
  GaussianSampler fbm(kernel, TimeGrid(merged.times));

  const std::size_t nb = br.size();
  const std::size_t m = grid.size();
  std::vector<double> values(n_paths * m);
  parallel::for_ranges(n_paths, [&](std::size_t begin, std::size_t end) {
    std::vector<double> buf(inner_size);
    for (std::size_t p = begin; p < end; ++p) {
      RngState r(rng.seed(), p);
      fbm.sample(r, buf);
      for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        if (grid[i] > 0.0) {
          for (std::size_t k = 0; k + 1 < nb; ++k) {
            acc += phi.values[k] * (buf[merged.index[i * nb + k + 1]] -
                                    buf[merged.index[i * nb + k]]);
          }
        }
        values[p * m + i] = acc;
      }
    }
  });
  return PathEnsemble(grid, n_paths, std::move(values), std::nullopt,
                      rng.seed(), "gphi(H=" + format_double(hurst) + ")",
                      fbm.jitter());
}

}  // namespace idt
