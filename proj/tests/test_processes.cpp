#include <gtest/gtest.h>

#include <cmath>

#include "idt/errors.hpp"
#include "idt/parallel.hpp"
#include "idt/processes.hpp"
#include "idt/statlab.hpp"
#include "oracles.hpp"

using namespace idt;

namespace {

double mean_product(const PathEnsemble& e, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t p = 0; p < e.n_paths(); ++p) s += e.at(p, i) * e.at(p, j);
  return s / static_cast<double>(e.n_paths());
}

}  // namespace

TEST(TimeGrid, Validation) {
  EXPECT_THROW(TimeGrid({}), DomainError);
  EXPECT_THROW(TimeGrid({1.0, 1.0}), DomainError);
  EXPECT_THROW(TimeGrid({2.0, 1.0}), DomainError);
  EXPECT_THROW(TimeGrid({-0.5, 1.0}), DomainError);
  EXPECT_THROW(TimeGrid({0.0, INFINITY}), DomainError);
  const TimeGrid g({0.0, 0.5, 2.0});
  EXPECT_EQ(g.scaled(2.0), TimeGrid({0.0, 1.0, 4.0}));
  EXPECT_THROW(g.scaled(0.0), DomainError);
}

TEST(LevyFamily, Validation) {
  EXPECT_THROW(validate(Brownian{-1.0, 0.0}), DomainError);
  EXPECT_THROW(validate(StableMotion{2.5, 0.0}), DomainError);
  EXPECT_THROW(validate(StableMotion{1.0, 0.3}), DomainError);
  EXPECT_THROW(validate(GammaSubordinator{0.0, 1.0}), DomainError);
  EXPECT_THROW(validate(CompoundPoisson{-1.0, 0.0, 1.0}), DomainError);
  EXPECT_TRUE(is_nondecreasing(GammaSubordinator{}));
  EXPECT_TRUE(is_nondecreasing(StableMotion{0.6, 1.0}));
  EXPECT_FALSE(is_nondecreasing(StableMotion{1.5, 1.0}));
  EXPECT_FALSE(is_nondecreasing(Brownian{}));
  EXPECT_TRUE(is_nondecreasing(Brownian{0.0, 1.0}));
}

TEST(LevyIncrements, ZeroDurationAndDomain) {
  RngState rng(1);
  const std::vector<double> dt{0.0, 1.0, 0.0};
  for (const LevyFamily& f :
       {LevyFamily{Brownian{}}, LevyFamily{StableMotion{1.5, 0.0}},
        LevyFamily{GammaSubordinator{}},
        LevyFamily{CompoundPoisson{2.0, 0.0, 1.0}}}) {
    const auto inc = levy_increments(f, dt, rng);
    EXPECT_EQ(inc[0], 0.0);
    EXPECT_EQ(inc[2], 0.0);
  }
  const std::vector<double> bad{1.0, -0.1};
  EXPECT_THROW(levy_increments(Brownian{}, bad, rng), DomainError);
}

TEST(LevyIncrements, BrownianVariance) {
  RngState rng(2);
  std::vector<double> dt(100000, 1.0);
  const auto inc = levy_increments(Brownian{}, dt, rng);
  EXPECT_NEAR(oracle::moments(inc).second, 1.0, 0.02);
}

TEST(LevyIncrements, PoissonWithoutArrivalsIsZero) {
  RngState rng(3);
  std::vector<double> dt(1000, 2.5);
  for (double v : levy_increments(CompoundPoisson{0.0, 1.0, 1.0}, dt, rng)) {
    ASSERT_EQ(v, 0.0);
  }
}

TEST(LevyIncrements, LawsAtDuration) {
  const std::size_t n = 50000;
  std::vector<double> dt(n, 0.3);
  RngState rng(4);
  const auto g = levy_increments(GammaSubordinator{2.0, 4.0}, dt, rng);
  EXPECT_NEAR(oracle::moments(g).first, 0.15, 5 * std::sqrt(0.6 / 16 / n));

  // Stable increment over dt is dt^{1/β} S.
  const auto s = levy_increments(StableMotion{1.3, 0.0}, dt, rng);
  std::vector<double> ref(n);
  RngState other(5);
  for (auto& v : ref) v = std::pow(0.3, 1 / 1.3) * sample_stable(other, StableParams(1.3));
  EXPECT_GT(ks_two_sample(s, ref).p_value, 0.01);

  // Compound Poisson: mean λ dt μ, variance λ dt (μ² + σ²).
  const auto c = levy_increments(CompoundPoisson{3.0, 0.5, 2.0}, dt, rng);
  const auto [m, v] = oracle::moments(c);
  EXPECT_NEAR(m, 0.45, 5 * std::sqrt(0.9 * 4.25 / n));
  EXPECT_NEAR(v, 0.9 * 4.25, 0.15);
}

TEST(ProcessSpec, ExponentsAndValidation) {
  EXPECT_EQ(ProcessSpec::stable_line(1.5).idt_exponent(), 1.5);
  EXPECT_EQ(ProcessSpec::power_line(3.0).idt_exponent(), 3.0);
  const auto fbm = ProcessSpec::gaussian(Kernel::fbm(0.3));
  EXPECT_DOUBLE_EQ(fbm.idt_exponent(), 0.6);
  const auto gadd = ProcessSpec::additive(GammaSubordinator{}, 0.7);
  EXPECT_EQ(gadd.idt_exponent(), 0.7);
  EXPECT_TRUE(gadd.is_chronometer());
  EXPECT_EQ(ProcessSpec::subordinated(Brownian{}, gadd).idt_exponent(), 0.7);
  EXPECT_DOUBLE_EQ(ProcessSpec::mixture(fbm, {{1, 0.5}, {2, -0.5}}).idt_exponent(),
                   0.6);
  EXPECT_EQ(ProcessSpec::phi_functional(GammaSubordinator{}, {{1, 1}}, 0.4)
                .idt_exponent(),
            0.4);

  EXPECT_THROW(ProcessSpec::stable_line(2.5), DomainError);
  EXPECT_THROW(ProcessSpec::power_line(0.0), DomainError);
  EXPECT_THROW(ProcessSpec::additive(Brownian{}, -1.0), DomainError);
  EXPECT_THROW(ProcessSpec::subordinated(Brownian{}, fbm), DomainError);
  EXPECT_THROW(ProcessSpec::mixture(fbm, {{0.0, 1.0}}), DomainError);
  EXPECT_THROW(ProcessSpec::mixture(fbm, {}), DomainError);
  EXPECT_THROW(ProcessSpec::phi_functional(Brownian{}, {{1, 1}}, 0.5),
               DomainError);
  EXPECT_THROW(ProcessSpec::phi_functional(GammaSubordinator{}, {{1, -1}}, 0.5),
               DomainError);
}

TEST(ProcessSpec, Describe) {
  const auto gadd = ProcessSpec::additive(GammaSubordinator{}, 0.7);
  EXPECT_EQ(gadd.describe(), "Additive(Gamma(shape=1,rate=1),alpha=0.7)");
  EXPECT_EQ(ProcessSpec::subordinated(Brownian{}, gadd).describe(),
            "Subordinated(Brownian(sigma=1,b=0),chrono=" + gadd.describe() + ")");
  EXPECT_EQ(ProcessSpec::mixture(ProcessSpec::gaussian(Kernel::fbm(0.3)),
                                 {{1, 0.5}, {2, 0.5}})
                .describe(),
            "Mixture(base=Gaussian(FBm(H=0.3)),atoms=[(1,0.5),(2,0.5)])");
}

TEST(PathEnsemble, ShapeContract) {
  EXPECT_THROW(PathEnsemble(TimeGrid({1, 2}), 2, std::vector<double>(3), {}, 0),
               ContractError);
  EXPECT_THROW(PathEnsemble(TimeGrid({1}), 0, {}, {}, 0), DomainError);
}

TEST(Generate, StableLineIsARandomLine) {
  const auto e = generate(ProcessSpec::stable_line(1.0), TimeGrid({0, 1, 2}),
                          1000, RngState(1));
  for (std::size_t p = 0; p < e.n_paths(); ++p) {
    EXPECT_EQ(e.at(p, 0), 0.0);
    EXPECT_EQ(e.at(p, 2), 2.0 * e.at(p, 1));
  }
  EXPECT_EQ(e.seed(), 1u);
  ASSERT_TRUE(e.spec().has_value());
}

TEST(Generate, PowerLineOneMatchesStableLineOne) {
  const TimeGrid g({1.7});
  const auto a = generate(ProcessSpec::power_line(1.0), g, 10000, RngState(2));
  const auto b = generate(ProcessSpec::stable_line(1.0), g, 10000, RngState(3));
  EXPECT_GT(ks_two_sample(a.column(0), b.column(0)).p_value, 0.01);
  const auto ks = ks_one_sample(a.column(0), [](double x) {
    return oracle::cauchy_cdf(x, 1.7);
  });
  EXPECT_GT(ks.p_value, 0.001);
}

TEST(Generate, IdentityMixtureMatchesBase) {
  const auto base = ProcessSpec::additive(StableMotion{1.4, 0.0}, 0.9);
  const TimeGrid g({0.5, 1, 2});
  const auto a =
      generate(ProcessSpec::mixture(base, {{1.0, 1.0}}), g, 10000, RngState(4));
  const auto b = generate(base, g, 10000, RngState(5));
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_GT(ks_two_sample(a.column(j), b.column(j)).p_value, 0.01);
  }
}

TEST(Generate, PathsDependOnlyOnSeedAndIndex) {
  const auto spec = ProcessSpec::subordinated(
      Brownian{}, ProcessSpec::additive(GammaSubordinator{}, 0.7));
  const TimeGrid g({0.5, 1, 2});
  const auto small = generate(spec, g, 10, RngState(9));
  const auto large = generate(spec, g, 40, RngState(9));
  for (std::size_t p = 0; p < 10; ++p) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(small.at(p, j), large.at(p, j));
  }
}

TEST(Generate, ThreadCountDoesNotChangeValues) {
  const auto spec = ProcessSpec::mixture(ProcessSpec::gaussian(Kernel::fbm(0.3)),
                                         {{1, 0.5}, {2, 0.5}});
  const TimeGrid g({0.5, 1, 2});
  parallel::set_threads(1);
  const auto one = generate(spec, g, 3000, RngState(10));
  parallel::set_threads(5);
  const auto five = generate(spec, g, 3000, RngState(10));
  parallel::set_threads(0);
  EXPECT_EQ(one.values(), five.values());
}

TEST(GaussianPaths, BrownianCovariance) {
  const std::size_t n = 20000;
  const auto e = gaussian_paths(Kernel::fbm(0.5), TimeGrid({1, 2, 3}), n,
                                RngState(11));
  const auto c = cov_estimate(e);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double target = std::min(i, j) + 1.0;
      // sd of X_i X_j is at most sqrt(3 * 3) * ... bounded by the largest
      // variance; 5 sd of the mean.
      EXPECT_NEAR(c(i, j), target, 5.0 * 3.0 * std::sqrt(2.0 / n)) << i << j;
    }
  }
}

TEST(GaussianPaths, SinglePointAndZeroTime) {
  const auto e = gaussian_paths(Kernel::fbm(0.3), TimeGrid({0.0, 1.0}), 20000,
                                RngState(12));
  for (std::size_t p = 0; p < e.n_paths(); ++p) ASSERT_EQ(e.at(p, 0), 0.0);
  EXPECT_NEAR(mean_product(e, 1, 1), 1.0, 5 * std::sqrt(2.0 / 20000));
}

TEST(GaussianPaths, CovarianceScaling) {
  // E[X_2 X_4] / E[X_1 X_2] = 2^{2H} for fBm.
  const auto e = gaussian_paths(Kernel::fbm(0.7), TimeGrid({1, 2, 4}), 100000,
                                RngState(13));
  const double ratio = mean_product(e, 1, 2) / mean_product(e, 0, 1);
  EXPECT_NEAR(ratio, std::pow(2.0, 1.4), 0.05 * std::pow(2.0, 1.4));
}

TEST(GaussianPaths, SpectralOnClusteredGridRecordsJitter) {
  const auto k = Kernel::spectral(1.0, SpectralMeasure({{0.0, 1.0}}));
  std::vector<double> times;
  for (int i = 0; i < 8; ++i) times.push_back(1.0 + 1e-3 * i);
  const auto e = gaussian_paths(k, TimeGrid(times), 100, RngState(14));
  EXPECT_GE(e.jitter(), 0.0);
  for (double v : e.values()) ASSERT_TRUE(std::isfinite(v));
}

TEST(AdditivePaths, ExponentOneIsLevy) {
  const TimeGrid g({0.5, 1, 2});
  const auto a = additive_paths(Brownian{}, 1.0, g, 20000, RngState(15));
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double t = g[j];
    EXPECT_GT(ks_one_sample(a.column(j), [t](double x) {
                return oracle::normal_cdf(x, t);
              }).p_value,
              0.001);
  }
}

TEST(AdditivePaths, BrownianSquareClockVariance) {
  const TimeGrid g({0.5, 1, 2});
  const std::size_t n = 40000;
  const auto a = additive_paths(Brownian{}, 2.0, g, n, RngState(16));
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double v = g[j] * g[j];
    EXPECT_NEAR(oracle::moments(a.column(j)).second, v, 5 * v * std::sqrt(2.0 / n));
  }
}

TEST(AdditivePaths, StableMarginals) {
  // L_{t^α} has the law of t^{α/β₀} S_{β₀}.
  const double beta0 = 1.2, alpha = 0.8;
  const TimeGrid g({0.5, 1, 2});
  const std::size_t n = 20000;
  const auto a = additive_paths(StableMotion{beta0, 0.0}, alpha, g, n, RngState(17));
  RngState rng(18);
  for (std::size_t j = 0; j < g.size(); ++j) {
    std::vector<double> ref(n);
    const double scale = std::pow(g[j], alpha / beta0);
    for (auto& v : ref) v = scale * sample_stable(rng, StableParams(beta0));
    EXPECT_GT(ks_two_sample(a.column(j), ref).p_value, 0.001) << g[j];
  }
}

TEST(AdditivePaths, SubordinatorsAreNondecreasing) {
  const TimeGrid g({0.0, 0.1, 0.5, 1, 2, 3});
  for (const LevyFamily& f : {LevyFamily{GammaSubordinator{0.5, 2.0}},
                              LevyFamily{StableMotion{0.6, 1.0}}}) {
    const auto e = additive_paths(f, 0.7, g, 5000, RngState(19));
    for (std::size_t p = 0; p < e.n_paths(); ++p) {
      EXPECT_EQ(e.at(p, 0), 0.0);
      for (std::size_t j = 1; j < g.size(); ++j) {
        ASSERT_GE(e.at(p, j), e.at(p, j - 1));
      }
    }
  }
}

TEST(Subordinate, FlatChronometerGivesFlatPath) {
  RngState rng(20);
  const std::vector<double> chrono{0.5, 0.5, 1.5, 1.5};
  std::vector<double> out(4);
  subordinate(Brownian{}, chrono, rng, out);
  EXPECT_EQ(out[1], out[0]);
  EXPECT_EQ(out[3], out[2]);
  const std::vector<double> bad{0.5, 0.4};
  std::vector<double> out2(2);
  EXPECT_THROW(subordinate(Brownian{}, bad, rng, out2), ContractError);
  const std::vector<double> negative{-0.1};
  std::vector<double> out1(1);
  EXPECT_THROW(subordinate(Brownian{}, negative, rng, out1), ContractError);
}

TEST(SubordinatedPaths, IdentityChronometerGivesLevyProcess) {
  const auto identity = ProcessSpec::additive(Brownian{0.0, 1.0}, 1.0);
  ASSERT_TRUE(identity.is_chronometer());
  const TimeGrid g({0.5, 1, 2});
  const auto z = subordinated_paths(StableMotion{1.5, 0.0}, identity, g, 20000,
                                    RngState(21));
  const auto l = additive_paths(StableMotion{1.5, 0.0}, 1.0, g, 20000, RngState(22));
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_GT(ks_two_sample(z.column(j), l.column(j)).p_value, 0.001);
  }
}

TEST(SubordinatedPaths, GammaClockBrownianMoments) {
  // Var B_{ξ_t} = E ξ_t = t^α for a unit Gamma clock.
  const auto chrono = ProcessSpec::additive(GammaSubordinator{}, 0.7);
  const TimeGrid g({0.5, 1, 2});
  const std::size_t n = 40000;
  const auto z = subordinated_paths(Brownian{}, chrono, g, n, RngState(23));
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double v = std::pow(g[j], 0.7);
    EXPECT_NEAR(oracle::moments(z.column(j)).second, v, 0.05 * v + 0.02);
  }
}

TEST(PhiFunctional, SingleAtomReducesToAdditive) {
  const TimeGrid g({0.5, 1, 2});
  const auto phi = phi_functional_paths(GammaSubordinator{}, {{1.0, 1.0}}, 0.7, g,
                                        20000, RngState(24));
  const auto add = additive_paths(GammaSubordinator{}, 0.7, g, 20000, RngState(25));
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_GT(ks_two_sample(phi.column(j), add.column(j)).p_value, 0.001);
  }
  const auto one = phi_functional_paths(GammaSubordinator{}, {{1.0, 1.0}}, 1.0, g,
                                        20000, RngState(26));
  const auto lev = additive_paths(GammaSubordinator{}, 1.0, g, 20000, RngState(27));
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_GT(ks_two_sample(one.column(j), lev.column(j)).p_value, 0.001);
  }
}

TEST(PhiFunctional, MeanIsWeightedClock) {
  // E X^{(φ)}_t = Σ w_j (u_j t)^α for a unit-mean Gamma subordinator.
  const TimeGrid g({0.5, 1, 2});
  const std::size_t n = 40000;
  const auto e = phi_functional_paths(GammaSubordinator{}, {{1, 0.5}, {2, 0.5}},
                                      0.7, g, n, RngState(28));
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double t = g[j];
    const double mean = 0.5 * std::pow(t, 0.7) + 0.5 * std::pow(2 * t, 0.7);
    EXPECT_NEAR(oracle::moments(e.column(j)).first, mean, 0.03 * mean);
  }
}

TEST(MergeTimes, MergesNearDuplicates) {
  const auto m = merge_times({2.0, 1.0, 2.0 * (1 + 1e-14), 0.5});
  EXPECT_EQ(m.times, (std::vector<double>{0.5, 1.0, 2.0}));
  EXPECT_EQ(m.index, (std::vector<std::size_t>{2, 1, 2, 0}));
}

TEST(GphiPaths, IndicatorGivesFBm) {
  const double h = 0.3;
  const TimeGrid g({0.5, 1, 2});
  const std::size_t n = 40000;
  const auto e = gphi_paths(h, StepFunction{{0.0, 1.0}, {1.0}}, g, n, RngState(29));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const double c = oracle::fbm_cov(h, g[i], g[j]);
      EXPECT_NEAR(mean_product(e, i, j), c, 5 * 2.0 * std::sqrt(2.0 / n));
    }
  }
}

TEST(GphiPaths, VarianceScaling) {
  const double h = 0.35;
  const TimeGrid g({1, 2});
  const auto e = gphi_paths(h, StepFunction{{0.0, 0.5, 1.0, 3.0}, {1.0, -0.5, 0.25}},
                            g, 100000, RngState(30));
  const double ratio = mean_product(e, 1, 1) / mean_product(e, 0, 0);
  EXPECT_NEAR(ratio, std::pow(2.0, 2 * h), 0.04 * std::pow(2.0, 2 * h));
}

TEST(GphiPaths, ZeroAndEmptyPhi) {
  const TimeGrid g({0.0, 1, 2});
  const auto e = gphi_paths(0.3, StepFunction{{0.0, 2.0}, {0.0}}, g, 100, RngState(31));
  for (double v : e.values()) ASSERT_EQ(v, 0.0);
  EXPECT_THROW(gphi_paths(0.3, StepFunction{{0.0}, {}}, g, 10, RngState(1)),
               DomainError);
}
