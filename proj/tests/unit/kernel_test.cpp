#include <gtest/gtest.h>

#include <cmath>

#include "landau/kernel.hpp"
#include "landau/rng.hpp"
#include "support/oracles.hpp"

using namespace landau;

namespace {

void expect_mat_near(const Mat3& a, const Mat3& b, double tol) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(a(r, c), b(r, c), tol) << "entry (" << r << "," << c << ")";
}

oracle::V3 to_v3(const Vec3& v) { return {v.x, v.y, v.z}; }

}  // namespace

TEST(Gamma, RejectsOutsideUnitInterval) {
  EXPECT_THROW(Gamma(0.0), std::invalid_argument);
  EXPECT_THROW(Gamma(1.5), std::invalid_argument);
  EXPECT_THROW(Gamma(std::nan("")), std::invalid_argument);
  EXPECT_NO_THROW(Gamma(1.0));
  EXPECT_NO_THROW(Gamma(1e-3));
}

TEST(ProjPerp, AxisAndDiagonalCases) {
  expect_mat_near(proj_perp({1, 0, 0}), Mat3::diag(0, 1, 1), 1e-15);
  expect_mat_near(proj_perp({0, 0, 2}), Mat3::diag(1, 1, 0), 1e-15);
  expect_mat_near(proj_perp({1, 1, 0}), Mat3{{0.5, -0.5, 0, -0.5, 0.5, 0, 0, 0, 1}}, 1e-15);
  EXPECT_THROW(proj_perp({0, 0, 0}), std::invalid_argument);
}

TEST(AMatrix, Examples) {
  expect_mat_near(a_matrix({1, 0, 0}, Gamma(1)), Mat3::diag(0, 1, 1), 1e-15);
  expect_mat_near(a_matrix({2, 0, 0}, Gamma(1)), Mat3::diag(0, 8, 8), 1e-14);
  expect_mat_near(a_matrix({0, 0, 0}, Gamma(0.3)), Mat3{}, 0.0);
}

TEST(BVector, Examples) {
  const Vec3 b1 = b_vector({1, 0, 0}, Gamma(1));
  EXPECT_DOUBLE_EQ(b1.x, -2.0);
  const Vec3 b2 = b_vector({0, 3, 0}, Gamma(0.5));
  EXPECT_NEAR(b2.y, -6.0 * std::sqrt(3.0), 1e-13);
  EXPECT_NEAR(b2.y, -10.3923, 1e-4);
  const Vec3 b0 = b_vector({0, 0, 0}, Gamma(1));
  EXPECT_EQ(norm(b0), 0.0);
}

TEST(SigmaMatrix, Examples) {
  expect_mat_near(sigma_matrix({1, 0, 0}, Gamma(1)), Mat3::diag(0, 1, 1), 1e-15);
  EXPECT_NEAR(frobenius_norm2(sigma_matrix({2, 0, 0}, Gamma(1))), 16.0, 1e-13);
  expect_mat_near(sigma_matrix({0, 0, 0}, Gamma(1)), Mat3{}, 0.0);
}

TEST(SigmaInner, Examples) {
  const Gamma g(1);
  EXPECT_NEAR(sigma_inner({1, 0, 0}, {1, 0, 0}, g), 2.0, 1e-15);
  EXPECT_NEAR(sigma_inner({1, 0, 0}, {0, 1, 0}, g), 1.0, 1e-15);
  // direct Frobenius product of the two explicit matrices
  const auto s1 = oracle::sigma_of({2, 0, 0}, 1.0), s2 = oracle::sigma_of({1, 0, 0}, 1.0);
  double fro = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) fro += s1[i][j] * s2[i][j];
  EXPECT_NEAR(sigma_inner({2, 0, 0}, {1, 0, 0}, g), fro, 1e-13);
  EXPECT_NEAR(fro, 5.6569, 1e-4);
}

TEST(PsdSqrt, Examples) {
  expect_mat_near(psd_sqrt(Mat3::diag(0, 4, 9)), Mat3::diag(0, 2, 3), 1e-14);
  expect_mat_near(psd_sqrt(Mat3::identity()), Mat3::identity(), 1e-15);
  const Gamma g(1);
  expect_mat_near(psd_sqrt(a_matrix({1, 1, 0}, g)), sigma_matrix({1, 1, 0}, g), 1e-13);
}

TEST(PsdSqrt, RejectsIndefiniteAndAsymmetric) {
  EXPECT_THROW(psd_sqrt(Mat3::diag(1, -1, 1)), std::invalid_argument);
  EXPECT_THROW(psd_sqrt(Mat3{{1, 0.5, 0, 0, 1, 0, 0, 0, 1}}), std::invalid_argument);
}

TEST(PsdSqrt, RandomAveragesSquareBack) {
  rng::Stream s(7, rng::Purpose::kGeneric, 0);
  for (int trial = 0; trial < 200; ++trial) {
    Mat3 a{};
    for (int k = 0; k < 20; ++k) a += a_matrix(s.normal3(), Gamma(0.7));
    a *= 1.0 / 20.0;
    const Mat3 r = psd_sqrt(a);
    EXPECT_LE(frobenius_norm(r * r - a), 1e-10 * frobenius_norm(a));
  }
}

TEST(Kernel, MatchesPlainOracle) {
  rng::Stream s(11, rng::Purpose::kGeneric, 1);
  for (int trial = 0; trial < 2000; ++trial) {
    const Vec3 x = (1.0 + 5.0 * s.uniform()) * s.normal3();
    const double g = 1.0 - s.uniform();
    const auto a = oracle::a_of(to_v3(x), g);
    const auto sg = oracle::sigma_of(to_v3(x), g);
    const auto b = oracle::b_of(to_v3(x), g);
    const Mat3 la = a_matrix(x, Gamma(g)), ls = sigma_matrix(x, Gamma(g));
    const Vec3 lb = b_vector(x, Gamma(g));
    const double sa = frobenius_norm(la), ss = frobenius_norm(ls);
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(lb[static_cast<std::size_t>(i)], b[i], 1e-13 * norm(lb));
      for (int j = 0; j < 3; ++j) {
        EXPECT_NEAR(la(i, j), a[i][j], 1e-13 * sa);
        EXPECT_NEAR(ls(i, j), sg[i][j], 1e-13 * ss);
      }
    }
  }
}

TEST(Kernel, SigmaApplyMatchesMatrix) {
  rng::Stream s(12, rng::Purpose::kGeneric, 2);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec3 x = s.normal3(), y = s.normal3();
    const Gamma g(1.0 - s.uniform());
    const Vec3 d = sigma_apply(x, y, g) - sigma_matrix(x, g) * y;
    EXPECT_LE(norm(d), 1e-13 * frobenius_norm(sigma_matrix(x, g)) * norm(y));
  }
}

TEST(Truncation, Examples) {
  const Gamma g(1);
  const auto t = truncate_coefficients({4, 0, 0}, 2.0, g);
  EXPECT_NEAR(t.drift.x, -16.0, 1e-14);
  expect_mat_near(t.diffusion, (4.0 * std::sqrt(2.0)) * Mat3::diag(0, 1, 1), 1e-13);
  const auto u = truncate_coefficients({1, 0.5, 0}, 2.0, g);
  expect_mat_near(u.diffusion, sigma_matrix({1, 0.5, 0}, g), 1e-15);
  EXPECT_LE(norm(u.drift - b_vector({1, 0.5, 0}, g)), 1e-15);
  EXPECT_THROW(truncate_coefficients({1, 0, 0}, 0.0, g), std::invalid_argument);
}
