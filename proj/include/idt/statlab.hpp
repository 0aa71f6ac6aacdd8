#pragma once

// Statistical checks that turn distributional identities into pass/fail
// reports: empirical characteristic functions, KS tests, covariance
// estimation.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "idt/processes.hpp"
#include "idt/report.hpp"

namespace idt {

using ThetaPoint = std::vector<double>;

/// Frequencies at which ECFs are compared. All points share dimension `dim`.
struct ThetaGrid {
  std::string id;
  std::size_t dim = 0;
  std::vector<ThetaPoint> points;
};

/// Components in {±0.25, ±0.5, ±1, ±2} with one or two nonzero entries,
/// first nonzero entry positive (the other half follows from conjugate
/// symmetry). Id "m12".
ThetaGrid default_theta_grid(std::size_t dim);

struct EcfEvaluation {
  std::vector<std::size_t> times;
  std::vector<ThetaPoint> theta_points;
  std::vector<std::complex<double>> values;
  std::size_t n_samples = 0;
};

/// (1/N) Σ_paths exp(i Σ_k θ_k X_{t_k}). Summation order is fixed
/// (blocks of paths reduced in index order) so results do not depend on
/// the worker count.
EcfEvaluation ecf(const PathEnsemble& e, std::span<const std::size_t> times,
                  const std::vector<ThetaPoint>& thetas);

struct KsResult {
  double statistic;
  double p_value;
};

/// Q(λ) = 2 Σ_{k>=1} (-1)^{k-1} exp(-2 k² λ²), the Kolmogorov survival
/// function.
double kolmogorov_survival(double lambda);

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

KsResult ks_one_sample(std::span<const double> sample,
                       const std::function<double(double)>& cdf);

/// Grid, marginal indices and frequencies shared by the ECF-distance tests.
struct EcfSetup {
  TimeGrid grid;
  std::vector<std::size_t> times;
  ThetaGrid thetas;
  std::size_t n_paths = 0;

  /// All grid indices (at most 3) with the default θ grid.
  static EcfSetup standard(TimeGrid grid, std::size_t n_paths);
  /// Identifies grid, marginal indices and θ grid for calibration keys.
  std::string theta_grid_id() const;
};

enum class IdtMode {
  kPower,  // compare the dilated ECF with the n-th power of the base ECF
  kSum,    // compare it with the ECF of an explicit n-fold independent sum
};

/// max_θ |ECF of X at n^{1/α} t  -  (ECF of X at t)^n|.
TestReport idt_test(const ProcessSpec& spec, double alpha, int n,
                    const EcfSetup& setup, const RngState& rng,
                    double threshold, IdtMode mode = IdtMode::kPower);

/// max_θ |ECF of X_{a t}  -  ECF of a^h X_t|.
TestReport selfsimilarity_test(const ProcessSpec& spec, double h, double a,
                               const EcfSetup& setup, const RngState& rng,
                               double threshold);

/// max_θ |ECF of Σ_{j<=n} X^{(j)}  -  ECF of n^{1/β} X|.
TestReport stability_test(const ProcessSpec& spec, double beta, int n,
                          const EcfSetup& setup, const RngState& rng,
                          double threshold);

/// max_θ |φ_t - φ_{b^{1/α} t} · φ_{(1-b)^{1/α} t}| over three independent
/// ensembles.
TestReport temporal_sd_test(const ProcessSpec& spec, double alpha, double b,
                            const EcfSetup& setup, const RngState& rng,
                            double threshold);

/// Compares the ECF of `window` consecutive columns at offset 0 with the
/// one at offset `shift`. The grid must be uniform.
TestReport stationarity_test(const PathEnsemble& e, std::size_t window,
                             std::size_t shift, const ThetaGrid& thetas,
                             double threshold);

/// Two-sample KS per time between the marginals of `spec` and of L_{t^α};
/// passes iff every p-value is >= level / |t_list|.
TestReport association_test(const ProcessSpec& spec, const LevyFamily& f,
                            double alpha, const std::vector<double>& t_list,
                            std::size_t n_paths, const RngState& rng,
                            double level = 0.01);

/// Uncentered sample covariance (1/N) Σ X_{t_i} X_{t_j}.
Eigen::MatrixXd cov_estimate(const PathEnsemble& e);

}  // namespace idt
