#include <gtest/gtest.h>

#include <cmath>

#include "landau/generators.hpp"
#include "landau/sampling.hpp"
#include "support/oracles.hpp"

using namespace landau;

namespace {

oracle::V3 to_v3(const Vec3& v) { return {v.x, v.y, v.z}; }

Quadruple coincident(const Vec3& v, const Vec3& vs) { return {v, vs, v, vs}; }

constexpr double kCentRegression = 2.3063011538845779;

}  // namespace

TEST(LApply, Examples) {
  const auto e2 = TestFunction::monomial(2);
  EXPECT_NEAR(L_apply(e2, {1, 0, 0}, {0, 0, 0}, Gamma(1)), -2.0, 1e-14);
  EXPECT_NEAR(L_moment_monomial(2, {1, 0, 0}, {0, 0, 0}, Gamma(1)), -2.0, 1e-14);
  EXPECT_EQ(L_moment_monomial(3.5, {1, 2, 3}, {1, 2, 3}, Gamma(0.5)), 0.0);
}

TEST(LApply, SymmetrizedCollisionInvariantsVanish) {
  const TestFunction fs[] = {TestFunction::coordinate(0), TestFunction::coordinate(1), TestFunction::coordinate(2),
                             TestFunction::monomial(2)};
  SamplerConfig cfg;
  for (std::uint64_t k = 0; k < 2000; ++k) {
    rng::Stream s(8, rng::Purpose::kSampler, k);
    const Vec3 v = sampling::point(s, cfg), vs = sampling::point(s, cfg);
    const Gamma g(1.0 - s.uniform());
    for (const auto& f : fs) {
      const double a = L_apply(f, v, vs, g), b = L_apply(f, vs, v, g);
      // magnitude of the cancelling drift and diffusion terms
      const double scale = 4.0 * (1.0 + norm(v) + norm(vs)) * std::pow(norm(v - vs), 1.0 + g.value());
      EXPECT_LE(std::abs(a + b), 1e-12 * scale + 1e-300);
    }
  }
}

TEST(LMomentMonomial, MatchesGenericGenerator) {
  rng::Stream s(9, rng::Purpose::kGeneric, 0);
  for (int k = 0; k < 500; ++k) {
    const Vec3 v = 2.0 * s.normal3(), vs = 2.0 * s.normal3();
    const double p = 2.0 + 4.0 * s.uniform();
    const Gamma g(1.0 - s.uniform());
    const double a = L_moment_monomial(p, v, vs, g), b = L_apply(TestFunction::monomial(p), v, vs, g);
    EXPECT_NEAR(a, b, 1e-12 * (std::abs(b) + 1.0));
  }
}

TEST(AApply, SeparableFunctionsSplit) {
  rng::Stream s(10, rng::Purpose::kGeneric, 0);
  const auto phi = TestFunction::gaussian_bump({0.2, 0.1, -0.4}, 1.3);
  const auto psi = PairTestFunction::separable(phi, 1.0);
  for (int k = 0; k < 500; ++k) {
    const Quadruple q{s.normal3(), s.normal3(), s.normal3(), s.normal3()};
    const Gamma g(1.0 - s.uniform());
    const double lhs = A_apply(psi, q, g);
    const double rhs = L_apply(phi, q.v, q.v_star, g) + L_apply(phi, q.vt, q.vt_star, g);
    EXPECT_NEAR(lhs, rhs, 1e-12 * (std::abs(lhs) + std::abs(rhs) + 1.0));
  }
}

TEST(AApply, CoupledPointsStayCoupled) {
  const Quadruple q = coincident({1, -2, 0.5}, {0.3, 0.7, -1});
  EXPECT_NEAR(A_apply(PairTestFunction::squared_distance(), q, Gamma(0.8)), 0.0, 1e-13);
}

TEST(CostDerivatives, MatchFiniteDifferences) {
  for (std::uint64_t k = 0; k < 300; ++k) {
    rng::Stream s(11, rng::Purpose::kSampler, k);
    const Vec3 v = 3.0 * s.normal3(), vt = 3.0 * s.normal3();
    const CostParams cp{2.0 + 4.0 * s.uniform(), s.uniform()};
    const auto an = cost_derivatives(v, vt, cp);
    const auto fd = fd_pair_derivatives([&](const Vec3& a, const Vec3& b) { return cost(a, b, cp); }, v, vt);
    const double gs = norm(an.grad_v) + norm(an.grad_vt);
    EXPECT_LE(norm(an.grad_v - fd.grad_v) + norm(an.grad_vt - fd.grad_vt), 1e-6 * gs);
    const double hs = frobenius_norm(an.hess_vv) + frobenius_norm(an.hess_tt) + frobenius_norm(an.hess_vt);
    const double he = frobenius_norm(an.hess_vv - fd.hess_vv) + frobenius_norm(an.hess_tt - fd.hess_tt) +
                      frobenius_norm(an.hess_vt - fd.hess_vt);
    EXPECT_LE(he, 1e-4 * hs) << "sample " << k;
  }
}

TEST(KTerms, VanishOnCoupledQuadruple) {
  const auto k = k_terms(3.0, 0.5, coincident({1, 2, 0}, {-1, 0, 1}), Gamma(1));
  EXPECT_EQ(k.k1, 0.0);
  EXPECT_EQ(k.k2, 0.0);
  EXPECT_EQ(k.k2_tilde, 0.0);
  EXPECT_EQ(k.k3, 0.0);
  EXPECT_EQ(k.k3_tilde, 0.0);
}

TEST(ItoRemainder, MatchesPlainOracleAndDecomposition) {
  SamplerConfig cfg;
  for (std::uint64_t n = 0; n < 5000; ++n) {
    const Quadruple q = sampling::quadruple(12, n, cfg);
    rng::Stream s(12, rng::Purpose::kGeneric, n);
    const double p = 2.0 + 4.0 * s.uniform(), eps = s.uniform(), g = 1.0 - s.uniform();
    const double rem = ito_remainder(p, eps, q, Gamma(g));
    const double ref = oracle::ito_remainder(to_v3(q.v), to_v3(q.v_star), to_v3(q.vt), to_v3(q.vt_star), p, eps, g);
    // cancellation in sigma(x) - sigma(xt) sets the scale for near pairs
    const double sn = frobenius_norm(sigma_matrix(q.v - q.v_star, Gamma(g))) + frobenius_norm(sigma_matrix(q.vt - q.vt_star, Gamma(g)));
    const double scale = 2.0 * moment_weight(q.v, q.vt, p) * std::abs(phi_eps_d2(norm2(q.v - q.vt), eps)) * sn * sn * norm2(q.v - q.vt);
    EXPECT_NEAR(rem, ref, 1e-12 * scale + 1e-300);
    EXPECT_LE(rem, 0.0);
    const auto a = A_cost_terms(q, {p, eps}, Gamma(g));
    const auto k = k_terms(p, eps, q, Gamma(g));
    EXPECT_NEAR(a.total() - k.sum(), rem, 1e-9 * (a.abs_scale() + std::abs(k.k1) + std::abs(k.k2) + std::abs(k.k2_tilde) +
                                                  std::abs(k.k3) + std::abs(k.k3_tilde)));
  }
}

TEST(CentRhs, Examples) {
  EXPECT_EQ(cent_rhs(3.0, 0.5, coincident({1, 2, 3}, {0, 1, 0}), Gamma(1), 2.0), 0.0);
  const Quadruple q{{1, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  EXPECT_NEAR(cent_rhs(2.0, 1.0, q, Gamma(1), 1.0), 2.0, 1e-14);
  EXPECT_THROW(cent_rhs(3.0, 0.0, q, Gamma(1), 1.0), std::invalid_argument);
}

TEST(CentStepBounds, CoincidentSlacksAreNonnegative) {
  const auto b = cent_step_bounds(coincident({1, 2, 3}, {-2, 0, 1}), 3.0, 0.25, Gamma(1));
  for (const auto& x : {b.i1, b.i2p, b.i2p_tilde, b.i3}) EXPECT_GE(x.slack(0.0), 0.0);
}

TEST(FitConstant, DegenerateSamplerReturnsFloor) {
  SamplerConfig cfg;
  cfg.coincident_only = true;
  CentFitOptions opts;
  opts.sample_count = 2000;
  opts.sampler = cfg;
  const auto fit = fit_cent_constant(3.0, 0.25, Gamma(1), opts);
  EXPECT_EQ(fit.constant, 1e-6);
  EXPECT_EQ(fit.active, 0u);
}

TEST(FitConstant, BisectionOnKnownBounds) {
  // lhs <= base + C coeff needs C = 3 exactly at the second bound
  std::vector<LinearBound> b{{1.0, 0.0, 1.0, 0.0}, {6.0, 0.0, 2.0, 0.0}, {-5.0, 0.0, 0.0, 0.0}};
  const auto fit = fit_constant(b);
  EXPECT_TRUE(fit.feasible);
  EXPECT_GE(fit.constant, 3.0);
  EXPECT_NEAR(fit.constant, 3.0, 1e-9);
  EXPECT_EQ(fit.active, 2u);
  std::vector<LinearBound> bad{{1.0, 0.0, 0.0, 0.0}};
  EXPECT_FALSE(fit_constant(bad).feasible);
}

// Frozen regression of the central-inequality fit (seed 42, p=3, gamma=1,
// eps=0.25, 1e5 samples, 32 x 600 refinement steps). Established on first run.
TEST(FitConstant, CentralRegressionValue) {
  CentFitOptions opts;
  opts.sample_count = 100000;
  opts.seed = 42;
  opts.refine.starts = 32;
  opts.refine.iterations = 600;
  const auto fit = fit_cent_constant(3.0, 0.25, Gamma(1), opts);
  EXPECT_TRUE(fit.feasible);
  EXPECT_NEAR(fit.constant, kCentRegression, 1e-9 * kCentRegression);
}
