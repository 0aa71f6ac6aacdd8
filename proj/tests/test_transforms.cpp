#include <gtest/gtest.h>

#include <cmath>

#include "idt/errors.hpp"
#include "idt/statlab.hpp"
#include "idt/transforms.hpp"
#include "oracles.hpp"

using namespace idt;

namespace {

std::vector<double> exp_grid(const std::vector<double>& y) {
  std::vector<double> t;
  for (double v : y) t.push_back(std::exp(v));
  return t;
}

double max_ecf_gap(const PathEnsemble& a, const PathEnsemble& b) {
  const auto thetas = default_theta_grid(a.n_times());
  std::vector<std::size_t> times(a.n_times());
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = i;
  const auto ea = ecf(a, times, thetas.points);
  const auto eb = ecf(b, times, thetas.points);
  double gap = 0.0;
  for (std::size_t q = 0; q < ea.values.size(); ++q) {
    gap = std::max(gap, std::abs(ea.values[q] - eb.values[q]));
  }
  return gap;
}

const ProcessSpec kFbm = ProcessSpec::gaussian(Kernel::fbm(0.3));

}  // namespace

TEST(Lamperti, TrivialCases) {
  const std::vector<double> y{-1.0, 0.0, 0.5};
  const auto e = generate(kFbm, TimeGrid(exp_grid(y)), 50, RngState(1));
  const auto same = lamperti_apply(e, 0.0, y);
  EXPECT_EQ(same.values(), e.values());
  EXPECT_EQ(same.grid(), TimeGrid::real_line(y));

  const auto one = generate(kFbm, TimeGrid({1.0}), 50, RngState(2));
  EXPECT_EQ(lamperti_apply(one, 0.6, {0.0}).values(), one.values());
}

TEST(Lamperti, GridMismatchIsContractError) {
  const auto e = generate(kFbm, TimeGrid({1.0, 2.0}), 10, RngState(3));
  EXPECT_THROW(lamperti_apply(e, 0.6, {0.0, 0.7}), ContractError);
  EXPECT_THROW(lamperti_apply(e, 0.6, {0.0}), ContractError);
}

TEST(Lamperti, InverseRestoresInputToOneUlp) {
  const std::vector<double> y{-2.0, -0.75, 0.0, 0.3, 1.9};
  const auto e = generate(kFbm, TimeGrid(exp_grid(y)), 2000, RngState(4));
  const auto back = lamperti_invert(lamperti_apply(e, 0.6, y), 0.6);
  EXPECT_EQ(back.grid(), e.grid());
  for (std::size_t i = 0; i < e.values().size(); ++i) {
    const double x = e.values()[i];
    ASSERT_LE(std::abs(back.values()[i] - x), std::nextafter(std::abs(x), INFINITY) - std::abs(x));
  }
}

TEST(Lamperti, EmpiricalCovarianceIsStationaryKernel) {
  const double h = 0.3;
  std::vector<double> y;
  for (int i = 0; i < 6; ++i) y.push_back(-1.0 + 0.4 * i);
  const std::size_t n = 40000;
  const auto e = generate(kFbm, TimeGrid(exp_grid(y)), n, RngState(5));
  const auto c = cov_estimate(lamperti_apply(e, 2 * h, y));
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double d = y[i] - y[j];
      const double closed =
          std::cosh(h * d) - 0.5 * std::pow(2 * std::sinh(std::abs(d) / 2), 2 * h);
      EXPECT_NEAR(c(i, j), closed, 5 * std::sqrt(2.0 / n));
    }
  }
}

TEST(ScalePaths, TrivialCases) {
  const auto e = generate(ProcessSpec::stable_line(1.5), TimeGrid({1, 2}), 100,
                          RngState(6));
  EXPECT_EQ(scale_paths(e, 1.0).values(), e.values());
  for (double v : scale_paths(e, 0.0).values()) ASSERT_EQ(v, 0.0);
  EXPECT_EQ(scale_paths(scale_paths(e, -1.0), -1.0).values(), e.values());
  EXPECT_EQ(scale_paths(e, 2.0).grid(), e.grid());
}

TEST(DilateGrid, IdentityAndInverse) {
  const auto e = generate(kFbm, TimeGrid({0.5, 1, 2}), 10, RngState(7));
  EXPECT_EQ(dilate_grid(e, 1.0).grid(), e.grid());
  EXPECT_EQ(dilate_grid(dilate_grid(e, 2.0), 0.5).grid(), e.grid());
  EXPECT_EQ(dilate_grid(e, 2.0).grid(), TimeGrid({0.25, 0.5, 1}));
  EXPECT_EQ(dilate_grid(e, 2.0).values(), e.values());
  EXPECT_THROW(dilate_grid(e, 0.0), DomainError);
}

TEST(DilateGrid, FBmSelfSimilarityInLaw) {
  // X_{a t} / a^H has the law of X_t.
  const double a = 2.5, h = 0.3;
  const std::size_t n = 20000;
  const TimeGrid g({0.5, 1, 2});
  const auto wide = generate(kFbm, g.scaled(a), n, RngState(8));
  const auto rescaled = scale_paths(dilate_grid(wide, a), std::pow(a, -h));
  EXPECT_EQ(rescaled.grid(), g);
  const auto fresh = generate(kFbm, g, n, RngState(9));
  EXPECT_LE(max_ecf_gap(rescaled, fresh), 5 * std::sqrt(2.0 / n));

  const auto wrong = scale_paths(dilate_grid(wide, a), std::pow(a, -0.8));
  EXPECT_GT(max_ecf_gap(wrong, fresh), 10 * std::sqrt(2.0 / n));
}

TEST(SumIndependent, SingleCopyIsGenerate) {
  const TimeGrid g({0.5, 1});
  const auto spec = ProcessSpec::additive(GammaSubordinator{}, 0.7);
  EXPECT_EQ(sum_independent(spec, 1, g, 100, RngState(10)).values(),
            generate(spec, g, 100, RngState(10)).values());
  EXPECT_THROW(sum_independent(spec, 0, g, 100, RngState(10)), DomainError);
}

TEST(SumIndependent, CauchyConvolution) {
  const auto s = sum_independent(ProcessSpec::stable_line(1.0), 2,
                                 TimeGrid({1.0}), 20000, RngState(11));
  const auto ks = ks_one_sample(s.column(0), [](double x) {
    return oracle::cauchy_cdf(x, 2.0);
  });
  EXPECT_GT(ks.p_value, 0.01);
}

TEST(SumIndependent, GaussianVarianceAdds) {
  const std::size_t n = 40000;
  const TimeGrid g({0.5, 2});
  for (std::size_t copies : {2u, 3u}) {
    const auto s = sum_independent(kFbm, copies, g, n, RngState(12));
    const auto c = cov_estimate(s);
    for (std::size_t j = 0; j < 2; ++j) {
      const double v = copies * std::pow(g[j], 0.6);
      EXPECT_NEAR(c(j, j), v, 5 * v * std::sqrt(2.0 / n));
    }
  }
}

TEST(Transforms, ProvenanceChains) {
  const auto e = generate(kFbm, TimeGrid({1, 2}), 10, RngState(13));
  const auto t = dilate_grid(scale_paths(e, 2.0), 2.0);
  EXPECT_NE(t.provenance().find("scale(2)"), std::string::npos);
  EXPECT_NE(t.provenance().find('|'), std::string::npos);
  EXPECT_EQ(t.seed(), e.seed());
}

TEST(Transforms, SamplersRejectRealLineGrids) {
  EXPECT_THROW(generate(kFbm, TimeGrid::real_line({-1.0, 0.5}), 10, RngState(1)),
               DomainError);
  EXPECT_THROW(TimeGrid::real_line({0.5, -1.0}), DomainError);
}
