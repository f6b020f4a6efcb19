#pragma once

// Closed-form Landau collision coefficients for hard potentials:
//   a(x)     = |x|^{2+gamma} Pi_{x-perp}
//   b(x)     = div a(x) = -2 |x|^gamma x
//   sigma(x) = a(x)^{1/2} = |x|^{1+gamma/2} Pi_{x-perp}
// All of them vanish at x = 0; only the projector itself is undefined there.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "landau/linalg.hpp"

namespace landau {

/// Interaction exponent, restricted to hard potentials 0 < gamma <= 1.
class Gamma {
 public:
  explicit Gamma(double value) : value_(value) {
    if (!(value > 0.0 && value <= 1.0))
      throw std::invalid_argument("gamma must lie in (0, 1], got " + std::to_string(value));
  }
  double value() const { return value_; }

 private:
  double value_;
};

/// r^e for r >= 0, e >= 0, computed as exp(e log r) with the r = 0 branch taken explicitly.
/// 0^0 is 1.
inline double pow_nonneg(double r, double e) {
  if (e == 0.0) return 1.0;
  if (r == 0.0) return 0.0;
  return std::exp(e * std::log(r));
}

/// Orthogonal projector onto the plane perpendicular to x.
inline Mat3 proj_perp(const Vec3& x) {
  const double r2 = norm2(x);
  if (r2 == 0.0) throw std::invalid_argument("proj_perp: projector is undefined at x = 0");
  Mat3 p = Mat3::identity();
  p -= (1.0 / r2) * Mat3::outer(x, x);
  return p;
}

/// |x|^2 I - x x^T, i.e. |x|^2 Pi_{x-perp} without the division.
inline Mat3 scaled_perp(const Vec3& x) {
  Mat3 p = norm2(x) * Mat3::identity();
  p -= Mat3::outer(x, x);
  return p;
}

inline Mat3 a_matrix(const Vec3& x, Gamma gamma) {
  const double r2 = norm2(x);
  if (r2 == 0.0) return {};
  return pow_nonneg(std::sqrt(r2), gamma.value()) * scaled_perp(x);
}

inline Vec3 b_vector(const Vec3& x, Gamma gamma) {
  const double r2 = norm2(x);
  if (r2 == 0.0) return {};
  return (-2.0 * pow_nonneg(std::sqrt(r2), gamma.value())) * x;
}

inline Mat3 sigma_matrix(const Vec3& x, Gamma gamma) {
  const double r2 = norm2(x);
  if (r2 == 0.0) return {};
  const double r = std::sqrt(r2);
  // |x|^{1+g/2} Pi = |x|^{g/2 - 1} (|x|^2 I - x x^T)
  return (pow_nonneg(r, 0.5 * gamma.value()) / r) * scaled_perp(x);
}

/// sigma(x) y without forming the matrix.
inline Vec3 sigma_apply(const Vec3& x, const Vec3& y, Gamma gamma) {
  const double r2 = norm2(x);
  if (r2 == 0.0) return {};
  const double r = std::sqrt(r2);
  const double s = pow_nonneg(r, 0.5 * gamma.value()) / r;
  return s * (r2 * y - dot(x, y) * x);
}

/// Frobenius inner product <<sigma(x), sigma(xt)>> in closed form.
inline double sigma_inner(const Vec3& x, const Vec3& xt, Gamma gamma) {
  const double r2 = norm2(x);
  const double rt2 = norm2(xt);
  if (r2 == 0.0 || rt2 == 0.0) return 0.0;
  const double e = 1.0 + 0.5 * gamma.value();
  const double c = dot(x, xt);
  return pow_nonneg(std::sqrt(r2), e) * pow_nonneg(std::sqrt(rt2), e) * (1.0 + c * c / (r2 * rt2));
}

/// Tolerance used by psd_sqrt for symmetry and eigenvalue clamping.
inline constexpr double kPsdTolerance = 1e-10;

/// Unique symmetric PSD square root via spectral decomposition. Eigenvalues in
/// [-tol * scale, 0) are clamped to zero; anything more negative is rejected.
inline Mat3 psd_sqrt(const Mat3& a) {
  const double scale = std::max(frobenius_norm(a), 1e-300);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = r + 1; c < 3; ++c)
      if (std::abs(a(r, c) - a(c, r)) > kPsdTolerance * scale)
        throw std::invalid_argument("psd_sqrt: matrix is not symmetric");
  if (!is_finite(a)) throw std::invalid_argument("psd_sqrt: non-finite entry");
  if (frobenius_norm2(a) == 0.0) return {};

  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = 0.5 * (a(r, c) + a(c, r));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  if (es.info() != Eigen::Success) throw std::runtime_error("psd_sqrt: eigen decomposition failed");

  Eigen::Vector3d lambda = es.eigenvalues();
  for (int k = 0; k < 3; ++k) {
    if (lambda(k) < -kPsdTolerance * scale)
      throw std::invalid_argument("psd_sqrt: matrix is indefinite (eigenvalue " +
                                  std::to_string(lambda(k)) + ")");
    lambda(k) = std::sqrt(std::max(lambda(k), 0.0));
  }
  const Eigen::Matrix3d root = es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
  Mat3 out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out(r, c) = 0.5 * (root(r, c) + root(c, r));
  return out;
}

/// Truncated, globally Lipschitz coefficients used to build the approximating SDE:
///   b_k(x) = -2 (|x| ^ k)^gamma x,   sigma_k(x) = (|x| ^ k)^{gamma/2} |x| Pi_{x-perp}.
struct TruncatedCoefficients {
  Vec3 drift;
  Mat3 diffusion;
};

inline TruncatedCoefficients truncate_coefficients(const Vec3& x, double k, Gamma gamma) {
  if (!(k > 0.0)) throw std::invalid_argument("truncate_coefficients: k must be positive");
  const double r2 = norm2(x);
  if (r2 == 0.0) return {};
  const double r = std::sqrt(r2);
  const double rk = std::min(r, k);
  TruncatedCoefficients out;
  out.drift = (-2.0 * pow_nonneg(rk, gamma.value())) * x;
  out.diffusion = (pow_nonneg(rk, 0.5 * gamma.value()) / r) * scaled_perp(x);
  return out;
}

}  // namespace landau
