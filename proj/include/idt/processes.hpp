#pragma once

// Sample-path generation for the alpha-IDT process families.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "idt/kernels.hpp"
#include "idt/randkit.hpp"
#include "idt/time_grid.hpp"

namespace idt {

// ---------------------------------------------------------------------------
// Levy families

/// volatility = 0 is accepted and gives the deterministic drift line b*t.
struct Brownian {
  double volatility = 1.0;
  double drift = 0.0;
  friend bool operator==(const Brownian&, const Brownian&) = default;
};

struct StableMotion {
  double index = 2.0;
  double skew = 0.0;
  friend bool operator==(const StableMotion&, const StableMotion&) = default;
};

struct GammaSubordinator {
  double shape = 1.0;
  double rate = 1.0;
  friend bool operator==(const GammaSubordinator&,
                         const GammaSubordinator&) = default;
};

/// Poisson(intensity) arrivals with Normal(jump_mean, jump_sd) jumps.
struct CompoundPoisson {
  double intensity = 0.0;
  double jump_mean = 0.0;
  double jump_sd = 1.0;
  friend bool operator==(const CompoundPoisson&,
                         const CompoundPoisson&) = default;
};

using LevyFamily =
    std::variant<Brownian, StableMotion, GammaSubordinator, CompoundPoisson>;

/// Throws DomainError on out-of-domain parameters.
void validate(const LevyFamily& f);

/// True when every path of the family is nondecreasing.
bool is_nondecreasing(const LevyFamily& f) noexcept;

std::string describe(const LevyFamily& f);

/// Independent increments over the given durations. A zero duration yields
/// an exact zero and consumes no randomness.
std::vector<double> levy_increments(const LevyFamily& f,
                                    std::span<const double> dt_list,
                                    RngState& rng);

/// Single increment; `f` must already be validated.
double levy_increment(const LevyFamily& f, double dt, RngState& rng);

// ---------------------------------------------------------------------------
// Process specifications

/// A weighted evaluation point (u, w): contributes w * X_{u t}.
struct TimeAtom {
  double u;
  double weight;
  friend bool operator==(const TimeAtom&, const TimeAtom&) = default;
};

class ProcessSpec;
using SpecPtr = std::shared_ptr<const ProcessSpec>;

/// X_t = t * S_alpha, S_alpha symmetric strictly alpha-stable.
struct StableLine {
  double alpha;
};
/// X_t = t^alpha * S, S standard Cauchy.
struct PowerLine {
  double alpha;
};
struct GaussianKernel {
  Kernel kernel;
};
/// L_{t^alpha}.
struct AdditiveTimeChange {
  LevyFamily family;
  double alpha;
};
/// L_{xi_t} with an independent nondecreasing chronometer xi.
struct Subordinated {
  LevyFamily family;
  SpecPtr chrono;
};
/// sum_i w_i X_{u_i t}, evaluated on one trajectory of the base process.
struct Mixture {
  SpecPtr base;
  std::vector<TimeAtom> atoms;
};
/// sum_j w_j X_{(u_j t)^alpha} for a subordinator X.
struct PhiFunctional {
  LevyFamily subordinator;
  std::vector<TimeAtom> atoms;
  double alpha;
};

/// Immutable, validated description of a process family. Construct through
/// the named factories; each checks its invariants.
class ProcessSpec {
 public:
  using Variant = std::variant<StableLine, PowerLine, GaussianKernel,
                               AdditiveTimeChange, Subordinated, Mixture,
                               PhiFunctional>;

  static ProcessSpec stable_line(double alpha);
  static ProcessSpec power_line(double alpha);
  static ProcessSpec gaussian(Kernel k);
  static ProcessSpec additive(LevyFamily f, double alpha);
  static ProcessSpec subordinated(LevyFamily f, ProcessSpec chrono);
  static ProcessSpec mixture(ProcessSpec base, std::vector<TimeAtom> atoms);
  static ProcessSpec phi_functional(LevyFamily sub, std::vector<TimeAtom> atoms,
                                    double alpha);

  const Variant& variant() const noexcept { return v_; }

  /// The alpha for which the family is alpha-IDT.
  double idt_exponent() const noexcept { return idt_exponent_; }

  /// Paths are nondecreasing and start at a nonnegative value by
  /// construction (admissible chronometers).
  bool is_chronometer() const noexcept;

  /// Canonical text form; two specs are the same family iff their
  /// descriptions agree.
  std::string describe() const;

 private:
  ProcessSpec(Variant v, double exponent)
      : v_(std::move(v)), idt_exponent_(exponent) {}

  Variant v_;
  double idt_exponent_;
};

// ---------------------------------------------------------------------------
// Ensembles

/// N sample paths on a shared grid, stored row-major (one row per path).
class PathEnsemble {
 public:
  PathEnsemble(TimeGrid grid, std::size_t n_paths, std::vector<double> values,
               std::optional<ProcessSpec> spec, std::uint64_t seed,
               std::string provenance = {}, double jitter = 0.0);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t n_paths() const noexcept { return n_paths_; }
  std::size_t n_times() const noexcept { return grid_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  double at(std::size_t path, std::size_t col) const noexcept {
    return values_[path * grid_.size() + col];
  }
  std::span<const double> path(std::size_t i) const noexcept {
    return {values_.data() + i * grid_.size(), grid_.size()};
  }
  /// All values of one column (the marginal at grid time `col`).
  std::vector<double> column(std::size_t col) const;

  const std::optional<ProcessSpec>& spec() const noexcept { return spec_; }
  std::uint64_t seed() const noexcept { return seed_; }
  /// Transform chain applied after generation (empty for raw ensembles).
  const std::string& provenance() const noexcept { return provenance_; }
  /// Diagonal jitter used by Gaussian factorization, 0 if none.
  double jitter() const noexcept { return jitter_; }

 private:
  TimeGrid grid_;
  std::size_t n_paths_;
  std::vector<double> values_;
  std::optional<ProcessSpec> spec_;
  std::uint64_t seed_;
  std::string provenance_;
  double jitter_;
};

/// Prepared sampler for one (spec, grid) pair. `sample` is const and
/// thread-safe; all randomness comes from the caller's state.
class PathSampler {
 public:
  virtual ~PathSampler() = default;
  virtual void sample(RngState& rng, std::span<double> out) const = 0;
  virtual double jitter() const noexcept { return 0.0; }
};

std::unique_ptr<PathSampler> make_sampler(const ProcessSpec& spec,
                                          const TimeGrid& grid);

/// Path i is drawn from RngState(rng.seed(), i); the result does not depend
/// on the worker count.
PathEnsemble generate(const ProcessSpec& spec, const TimeGrid& grid,
                      std::size_t n_paths, const RngState& rng);

PathEnsemble gaussian_paths(const Kernel& k, const TimeGrid& grid,
                            std::size_t n_paths, const RngState& rng);

PathEnsemble additive_paths(const LevyFamily& f, double alpha,
                            const TimeGrid& grid, std::size_t n_paths,
                            const RngState& rng);

PathEnsemble subordinated_paths(const LevyFamily& f, const ProcessSpec& chrono,
                                const TimeGrid& grid, std::size_t n_paths,
                                const RngState& rng);

PathEnsemble phi_functional_paths(const LevyFamily& sub,
                                  const std::vector<TimeAtom>& atoms,
                                  double alpha, const TimeGrid& grid,
                                  std::size_t n_paths, const RngState& rng);

/// Step function phi = values[k] on [breaks[k], breaks[k+1]), zero elsewhere.
struct StepFunction {
  std::vector<double> breaks;
  std::vector<double> values;
};

/// G_t = ∫ phi(u/t) dB_H(u) for a step phi. The integral is evaluated as
/// sum_k values[k] (B_H(t b_{k+1}) - B_H(t b_k)) on one fBm trajectory
/// sampled at the product grid {t_i b_k}; G_0 = 0.
PathEnsemble gphi_paths(double hurst, const StepFunction& phi,
                        const TimeGrid& grid, std::size_t n_paths,
                        const RngState& rng);

/// Sorted union of `times` with near-duplicates (relative 1e-12) merged;
/// `index[i]` gives the position of times[i] in the result.
struct MergedTimes {
  std::vector<double> times;
  std::vector<std::size_t> index;
};
MergedTimes merge_times(const std::vector<double>& times);

}  // namespace idt

namespace idt {

/// Accumulates Levy increments of `f` over the increments of one chronometer
/// path (starting from xi = 0 before the first grid time). Throws
/// ContractError if the path is negative or decreasing anywhere.
void subordinate(const LevyFamily& f, std::span<const double> chrono_path,
                 RngState& rng, std::span<double> out);

}  // namespace idt
