#include <gtest/gtest.h>

#include <cmath>

#include "landau/moments.hpp"
#include "landau/numeric.hpp"
#include "landau/rng.hpp"
#include "support/ode_oracle.hpp"
#include "support/oracles.hpp"

using namespace landau;

TEST(EmpiricalMoment, Examples) {
  EXPECT_EQ(empirical_moment(DiscreteMeasure::uniform({{0, 0, 0}}), 3.0), 0.0);
  EXPECT_DOUBLE_EQ(empirical_moment(DiscreteMeasure::uniform({{1, 0, 0}, {-1, 0, 0}}), 2.0), 1.0);
  EXPECT_THROW(empirical_moment(DiscreteMeasure::uniform({{1, 0, 0}}), -1.0), std::invalid_argument);
}

TEST(EmpiricalMoment, GaussianSecondMomentWithinInterval) {
  const std::size_t n = 100000;
  std::vector<Vec3> v(n);
  std::vector<double> r2(n);
  rng::Stream s(21, rng::Purpose::kGeneric, 0);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = s.normal3();
    r2[i] = norm2(v[i]);
  }
  const double m2 = empirical_moment(v, 2.0);
  // var |V|^2 = 6 for a standard 3D normal
  EXPECT_NEAR(m2, 3.0, 3.0 * std::sqrt(6.0 / n));
  EXPECT_NEAR(m2, sample_stats(r2).mean, 1e-12);
}

TEST(MomentOdeRhs, Examples) {
  EXPECT_DOUBLE_EQ(moment_ode_rhs_bound(2, 1, 1, 1, 1, 1, 1), 8.0);
  EXPECT_LT(moment_ode_rhs_bound(4, 1, 1e6, 1, 1, 1, 1), 0.0);
  EXPECT_THROW(moment_ode_rhs_bound(1.5, 1, 1, 1, 1, 1, 1), std::invalid_argument);
}

TEST(OdeComparisonBound, Examples) {
  EXPECT_DOUBLE_EQ(ode_comparison_bound({1, 1, 1, 1, 1}, 1.0), 8.0);
  EXPECT_NEAR(ode_comparison_bound({1, 1, 1, 1, 1}, 1e12), 4.0 + 2.0, 1e-11);
  EXPECT_THROW(ode_comparison_bound({1, 1, 1, 1, 1}, 0.0), std::invalid_argument);
  EXPECT_THROW(ode_comparison_bound({1, -1, 1, 1, 1}, 1.0), std::invalid_argument);
}

TEST(OdeComparisonBound, Rk4OracleStaysBelow) {
  rng::Stream s(22, rng::Purpose::kGeneric, 0);
  for (int trial = 0; trial < 10; ++trial) {
    OdeParams prm{0.5 + 2 * s.uniform(), 0.5 + 2 * s.uniform(), 0.5 + 2 * s.uniform(), 0.3 + s.uniform(),
                  0.3 + 0.6 * s.uniform()};
    oracle::ComparisonOdeOracle ode(prm);
    for (double t : {0.01, 0.1, 1.0}) {
      const double u = ode.advance_to(t), bound = ode_comparison_bound(prm, t);
      EXPECT_LE(u, bound * (1.0 + 1e-6)) << "trial " << trial << " t " << t;
    }
  }
}

TEST(Step4Bound, Examples) {
  EXPECT_DOUBLE_EQ(step4_moment_bound(4, 1, 1, 1), 97.0);
  EXPECT_GT(step4_moment_bound(4, 1, 1e-3, 1), 1e12);
  EXPECT_THROW(step4_moment_bound(3, 1, 1, 1), std::invalid_argument);
}

TEST(Step4Bound, RequiredConstantInvertsBound) {
  EXPECT_EQ(step4_required_constant(4, 1, 1, 50.0), 1e-6);
  const double c = step4_required_constant(4, 1, 1, 200.0);
  EXPECT_NEAR(step4_moment_bound(4, 1, 1, c), 200.0, 1e-10);
}

TEST(GaussianMoment, Examples) {
  EXPECT_DOUBLE_EQ(gaussian_moment(DiscreteMeasure::uniform({{0, 0, 0}}), 0.3).value, 1.0);
  EXPECT_NEAR(gaussian_moment(DiscreteMeasure::uniform({{1, 0, 0}, {-1, 0, 0}}), std::log(2.0)).value, 2.0, 1e-14);
  const auto clipped = gaussian_moment(DiscreteMeasure::uniform({{100, 0, 0}}), 1.0);
  EXPECT_TRUE(clipped.clipped);
  EXPECT_TRUE(std::isfinite(clipped.value));
}

TEST(GaussianMoment, MonteCarloMatchesGaussianIntegral) {
  const std::size_t n = 100000;
  std::vector<Vec3> v(n);
  std::vector<double> e(n);
  rng::Stream s(23, rng::Purpose::kGeneric, 0);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = std::sqrt(0.5) * s.normal3();
    e[i] = std::exp(0.25 * norm2(v[i]));
  }
  const double expected = oracle::gaussian_exponential_moment(0.25, 0.5);
  EXPECT_NEAR(expected, 1.5396, 1e-4);
  const auto st = sample_stats(e);
  EXPECT_NEAR(gaussian_moment(DiscreteMeasure::uniform(v), 0.25).value, expected, 4.0 * st.std_error);
}

TEST(Interpolation, HoldsForNormalizedSamples) {
  rng::Stream s(24, rng::Purpose::kGeneric, 0);
  std::vector<Vec3> v(5000);
  for (auto& x : v) x = (0.5 + s.uniform()) * s.normal3();
  const auto nv = normalize_energy(v);
  EXPECT_NEAR(empirical_moment(nv, 2.0), 1.0, 1e-12);
  for (auto [a, b] : {std::pair{2.5, 4.0}, std::pair{3.0, 6.0}, std::pair{4.0, 8.0}})
    EXPECT_GE(interpolation_slack(nv, a, b), -1e-12);
}

TEST(MomentSeries, AppendsInTimeOrder) {
  MomentSeries ms;
  ms.orders = {2.0, 4.0};
  ms.append(0.0, {{1, 0, 0}, {-1, 0, 0}});
  EXPECT_DOUBLE_EQ(ms.values[0][1], 1.0);
  EXPECT_THROW(ms.append(0.0, {{1, 0, 0}}), std::invalid_argument);
}
