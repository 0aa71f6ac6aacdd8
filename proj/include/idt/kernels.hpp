#pragma once

// Covariance kernels c(s,t) of centered Gaussian processes that satisfy
// c(as, at) = a^alpha c(s, t), together with the scaling/PSD checks and the
// Lamperti-transformed (stationary) kernel.

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "idt/report.hpp"
#include "idt/time_grid.hpp"

namespace idt {

struct SpectralAtom {
  double location;
  double weight;

  friend bool operator==(const SpectralAtom&, const SpectralAtom&) = default;
};

/// Finite, positive, symmetric atomic measure on the real line: every atom
/// (a, w) with a != 0 is matched by (-a, w).
class SpectralMeasure {
 public:
  explicit SpectralMeasure(std::vector<SpectralAtom> atoms);

  /// Builds {(0, w0)} plus the pairs (±a_j, w_j).
  static SpectralMeasure symmetric(double zero_weight,
                                   const std::vector<SpectralAtom>& pairs);

  const std::vector<SpectralAtom>& atoms() const noexcept { return atoms_; }
  double total_mass() const noexcept;

  /// sum_j w_j cos(a_j x); the sine part cancels by symmetry.
  double cosine_transform(double x) const noexcept;

  friend bool operator==(const SpectralMeasure&,
                         const SpectralMeasure&) = default;

 private:
  std::vector<SpectralAtom> atoms_;
};

struct FBmKernel {
  double hurst;

  friend bool operator==(const FBmKernel&, const FBmKernel&) = default;
};

struct SpectralKernel {
  double alpha;
  SpectralMeasure measure;

  friend bool operator==(const SpectralKernel&,
                         const SpectralKernel&) = default;
};

class Kernel {
 public:
  using Variant = std::variant<FBmKernel, SpectralKernel>;

  static Kernel fbm(double hurst);
  static Kernel spectral(double alpha, SpectralMeasure measure);

  const Variant& variant() const noexcept { return v_; }

  /// The exponent alpha with c(as,at) = a^alpha c(s,t): 2H for fBm.
  double scaling_exponent() const noexcept;

  double operator()(double s, double t) const;

  /// Canonical text form, e.g. `FBm(H=0.3)`.
  std::string describe() const;

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  explicit Kernel(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

/// ½(|t|^{2H} + |s|^{2H} - |t-s|^{2H}).
double fbm_cov(double hurst, double s, double t);

/// (st)^{α/2} Σ_j w_j cos(a_j ln(s/t)). Both times must be > 0.
double spectral_cov(double alpha, const SpectralMeasure& mu, double s,
                    double t);

Eigen::MatrixXd cov_matrix(const Kernel& k, const TimeGrid& grid);

/// Max over grid pairs of |c(as,at) - a^α c(s,t)| / max(1, |c(s,t)|).
TestReport check_scaling(const Kernel& k, double alpha, double a,
                         const TimeGrid& grid, double tol);

/// Smallest eigenvalue of a symmetric matrix. Throws ContractError when the
/// input is not symmetric (relative tolerance `symmetry_tol`).
double psd_check(const Eigen::MatrixXd& m, double symmetry_tol = 1e-12);

/// e^{-α(y+z)/2} c(e^y, e^z).
double lamperti_cov(const Kernel& k, double alpha, double y, double z);

}  // namespace idt
