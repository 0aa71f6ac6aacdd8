#include "idt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "idt/errors.hpp"

namespace idt {

SpectralMeasure::SpectralMeasure(std::vector<SpectralAtom> atoms)
    : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw DomainError("spectral measure has no atoms");
  for (const auto& a : atoms_) {
    if (!std::isfinite(a.location) || !(a.weight > 0.0) ||
        !std::isfinite(a.weight)) {
      throw DomainError(
          "spectral atoms need finite locations and positive finite weights");
    }
  }
  // Symmetry: the mass at a equals the mass at -a.
  std::map<double, double> mass;
  for (const auto& a : atoms_) mass[a.location] += a.weight;
  for (const auto& [loc, w] : mass) {
    if (loc <= 0.0) continue;
    const auto it = mass.find(-loc);
    if (it == mass.end() ||
        std::abs(it->second - w) > 1e-12 * std::max(1.0, w)) {
      throw DomainError("spectral measure is not symmetric at location " +
                        format_double(loc));
    }
  }
  for (const auto& [loc, w] : mass) {
    if (loc < 0.0 && mass.find(-loc) == mass.end()) {
      throw DomainError("spectral measure is not symmetric at location " +
                        format_double(loc));
    }
  }
}

SpectralMeasure SpectralMeasure::symmetric(
    double zero_weight, const std::vector<SpectralAtom>& pairs) {
  std::vector<SpectralAtom> atoms;
  if (zero_weight > 0.0) atoms.push_back({0.0, zero_weight});
  for (const auto& p : pairs) {
    if (p.location == 0.0) {
      throw DomainError("paired spectral atoms need a nonzero location");
    }
    atoms.push_back({p.location, p.weight});
    atoms.push_back({-p.location, p.weight});
  }
  return SpectralMeasure(std::move(atoms));
}

double SpectralMeasure::total_mass() const noexcept {
  double m = 0.0;
  for (const auto& a : atoms_) m += a.weight;
  return m;
}

double SpectralMeasure::cosine_transform(double x) const noexcept {
  double acc = 0.0;
  for (const auto& a : atoms_) acc += a.weight * std::cos(a.location * x);
  return acc;
}

Kernel Kernel::fbm(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw DomainError("Hurst index must lie in (0, 1), got " +
                      format_double(hurst));
  }
  return Kernel(FBmKernel{hurst});
}

Kernel Kernel::spectral(double alpha, SpectralMeasure measure) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("spectral kernel exponent must be positive");
  }
  return Kernel(SpectralKernel{alpha, std::move(measure)});
}

double Kernel::scaling_exponent() const noexcept {
  if (const auto* f = std::get_if<FBmKernel>(&v_)) return 2.0 * f->hurst;
  return std::get<SpectralKernel>(v_).alpha;
}

double Kernel::operator()(double s, double t) const {
  if (const auto* f = std::get_if<FBmKernel>(&v_)) {
    return fbm_cov(f->hurst, s, t);
  }
  const auto& sp = std::get<SpectralKernel>(v_);
  return spectral_cov(sp.alpha, sp.measure, s, t);
}

std::string Kernel::describe() const {
  if (const auto* f = std::get_if<FBmKernel>(&v_)) {
    return "FBm(H=" + format_double(f->hurst) + ")";
  }
  const auto& sp = std::get<SpectralKernel>(v_);
  std::string out = "Spectral(alpha=" + format_double(sp.alpha) + ",mu=[";
  bool first = true;
  for (const auto& a : sp.measure.atoms()) {
    if (!first) out += ",";
    first = false;
    out += "(" + format_double(a.location) + "," + format_double(a.weight) +
           ")";
  }
  return out + "])";
}

double fbm_cov(double hurst, double s, double t) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw DomainError("Hurst index must lie in (0, 1), got " +
                      format_double(hurst));
  }
  if (s < 0.0 || t < 0.0) throw DomainError("fBm times must be nonnegative");
  const double h2 = 2.0 * hurst;
  if (hurst == 0.5) return std::min(s, t);
  return 0.5 * (std::pow(t, h2) + std::pow(s, h2) -
                std::pow(std::abs(t - s), h2));
}

double spectral_cov(double alpha, const SpectralMeasure& mu, double s,
                    double t) {
  if (!(s > 0.0) || !(t > 0.0)) {
    throw DomainError("spectral kernels are defined for strictly positive "
                      "times only");
  }
  return std::pow(s * t, alpha / 2.0) *
         mu.cosine_transform(std::abs(std::log(s / t)));
}

Eigen::MatrixXd cov_matrix(const Kernel& k, const TimeGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double c = k(grid[static_cast<std::size_t>(i)],
                         grid[static_cast<std::size_t>(j)]);
      m(i, j) = c;
      m(j, i) = c;
    }
  }
  return m;
}

TestReport check_scaling(const Kernel& k, double alpha, double a,
                         const TimeGrid& grid, double tol) {
  if (!(tol > 0.0)) throw DomainError("check_scaling tolerance must be > 0");
  if (!(a > 0.0)) throw DomainError("scaling factor must be > 0");
  const double factor = std::pow(a, alpha);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i; j < grid.size(); ++j) {
      const double base = k(grid[i], grid[j]);
      const double scaled = k(a * grid[i], a * grid[j]);
      worst = std::max(worst, std::abs(scaled - factor * base) /
                                  std::max(1.0, std::abs(base)));
    }
  }
  return TestReport::make("check_scaling", worst, tol, Decision::kDistance,
                          grid.size(), 0,
                          {{"kernel", k.describe()},
                           {"alpha", format_double(alpha)},
                           {"a", format_double(a)}});
}

double psd_check(const Eigen::MatrixXd& m, double symmetry_tol) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw ContractError("psd_check needs a nonempty square matrix");
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double scale = std::max({1.0, std::abs(m(i, j)), std::abs(m(j, i))});
      if (std::abs(m(i, j) - m(j, i)) > symmetry_tol * scale) {
        throw ContractError("psd_check input is not symmetric");
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigenvalue solver did not converge");
  }
  return solver.eigenvalues().minCoeff();
}

double lamperti_cov(const Kernel& k, double alpha, double y, double z) {
  return std::exp(-alpha * (y + z) / 2.0) * k(std::exp(y), std::exp(z));
}

}  // namespace idt
