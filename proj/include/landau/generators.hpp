#pragma once

// Weak-form generator L, coupling generator A, the Ito-type decomposition of
// A c_{p,eps} into five closed-form terms plus a nonpositive remainder, and the
// pieces needed to test the central inequality numerically.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "landau/kernel.hpp"
#include "landau/linalg.hpp"
#include "landau/sampling.hpp"
#include "landau/transport.hpp"

namespace landau {

/// Scalar test function on R^3 with its first and second derivatives.
struct TestFunction {
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> gradient;
  std::function<Mat3(const Vec3&)> hessian;

  /// phi(v) = |v|^p, p >= 2.
  static TestFunction monomial(double p) {
    if (!(p >= 2.0)) throw std::invalid_argument("monomial test function needs p >= 2");
    TestFunction f;
    f.value = [p](const Vec3& v) { return pow_nonneg(norm(v), p); };
    f.gradient = [p](const Vec3& v) { return (p * pow_nonneg(norm(v), p - 2.0)) * v; };
    f.hessian = [p](const Vec3& v) {
      const double r2 = norm2(v);
      Mat3 h = (p * pow_nonneg(std::sqrt(r2), p - 2.0)) * Mat3::identity();
      if (r2 > 0.0 && p != 2.0) h += (p * (p - 2.0) * pow_nonneg(std::sqrt(r2), p - 2.0) / r2) * Mat3::outer(v, v);
      return h;
    };
    return f;
  }

  /// phi(v) = v_k.
  static TestFunction coordinate(int k) {
    if (k < 0 || k > 2) throw std::invalid_argument("coordinate index must be 0, 1 or 2");
    TestFunction f;
    f.value = [k](const Vec3& v) { return v[static_cast<std::size_t>(k)]; };
    f.gradient = [k](const Vec3&) {
      Vec3 g;
      g[static_cast<std::size_t>(k)] = 1.0;
      return g;
    };
    f.hessian = [](const Vec3&) { return Mat3{}; };
    return f;
  }

  /// Bounded smooth test function exp(-|v - c|^2 / (2 s^2)).
  static TestFunction gaussian_bump(const Vec3& center, double s) {
    TestFunction f;
    f.value = [=](const Vec3& v) { return std::exp(-norm2(v - center) / (2.0 * s * s)); };
    f.gradient = [=](const Vec3& v) {
      const Vec3 d = v - center;
      return (-std::exp(-norm2(d) / (2.0 * s * s)) / (s * s)) * d;
    };
    f.hessian = [=](const Vec3& v) {
      const Vec3 d = v - center;
      const double e = std::exp(-norm2(d) / (2.0 * s * s));
      Mat3 h = (-e / (s * s)) * Mat3::identity();
      h += (e / (s * s * s * s)) * Mat3::outer(d, d);
      return h;
    };
    return f;
  }

  /// Bounded smooth test function sin(k . v).
  static TestFunction plane_wave(const Vec3& k) {
    TestFunction f;
    f.value = [=](const Vec3& v) { return std::sin(dot(k, v)); };
    f.gradient = [=](const Vec3& v) { return std::cos(dot(k, v)) * k; };
    f.hessian = [=](const Vec3& v) { return (-std::sin(dot(k, v))) * Mat3::outer(k, k); };
    return f;
  }
};

/// Value and derivatives of a function psi(v, vt) at one point.
struct PairDerivatives {
  double value{0.0};
  Vec3 grad_v;
  Vec3 grad_vt;
  Mat3 hess_vv;
  Mat3 hess_tt;
  Mat3 hess_vt;  // (k, l) entry is d^2 psi / dv_k dvt_l
};

/// Test function on R^3 x R^3.
struct PairTestFunction {
  std::function<double(const Vec3&, const Vec3&)> value;
  std::function<PairDerivatives(const Vec3&, const Vec3&)> derivatives;

  /// psi(v, vt) = phi(v) + w * phi(vt); w = 0 gives a function of v alone.
  static PairTestFunction separable(const TestFunction& phi, double w) {
    PairTestFunction f;
    f.value = [=](const Vec3& v, const Vec3& vt) { return phi.value(v) + w * phi.value(vt); };
    f.derivatives = [=](const Vec3& v, const Vec3& vt) {
      PairDerivatives d;
      d.value = phi.value(v) + w * phi.value(vt);
      d.grad_v = phi.gradient(v);
      d.grad_vt = w * phi.gradient(vt);
      d.hess_vv = phi.hessian(v);
      d.hess_tt = w * phi.hessian(vt);
      return d;
    };
    return f;
  }

  /// psi(v, vt) = |v - vt|^2.
  static PairTestFunction squared_distance() {
    PairTestFunction f;
    f.value = [](const Vec3& v, const Vec3& vt) { return norm2(v - vt); };
    f.derivatives = [](const Vec3& v, const Vec3& vt) {
      PairDerivatives d;
      d.value = norm2(v - vt);
      d.grad_v = 2.0 * (v - vt);
      d.grad_vt = -2.0 * (v - vt);
      d.hess_vv = 2.0 * Mat3::identity();
      d.hess_tt = 2.0 * Mat3::identity();
      d.hess_vt = -2.0 * Mat3::identity();
      return d;
    };
    return f;
  }

  static PairTestFunction cost(const CostParams& params);
};

/// Analytic value, gradient and Hessian of c_{p,eps}(v, vt).
inline PairDerivatives cost_derivatives(const Vec3& v, const Vec3& vt, const CostParams& params) {
  const double p = params.p;
  const Vec3 d = v - vt;
  const double r = norm2(d);
  const double ph = phi_eps(r, params.eps);
  const double ph1 = phi_eps_d1(r, params.eps);
  const double ph2 = phi_eps_d2(r, params.eps);
  const double nv = norm(v);
  const double nt = norm(vt);
  const double w = 1.0 + pow_nonneg(nv, p) + pow_nonneg(nt, p);
  const double sv = p * pow_nonneg(nv, p - 2.0);  // p |v|^{p-2}
  const double st = p * pow_nonneg(nt, p - 2.0);
  // p (p-2) |v|^{p-4} as a multiplier of v v^T, grouped to stay finite at v = 0
  const double qv = (nv > 0.0 && p != 2.0) ? (p - 2.0) * sv / (nv * nv) : 0.0;
  const double qt = (nt > 0.0 && p != 2.0) ? (p - 2.0) * st / (nt * nt) : 0.0;

  PairDerivatives out;
  out.value = w * ph;
  out.grad_v = (sv * ph) * v + (2.0 * w * ph1) * d;
  out.grad_vt = (st * ph) * vt - (2.0 * w * ph1) * d;

  const Mat3 dd = Mat3::outer(d, d);
  const Mat3 id = Mat3::identity();
  out.hess_vv = (sv * ph) * id + (qv * ph) * Mat3::outer(v, v) +
                (2.0 * sv * ph1) * (Mat3::outer(v, d) + Mat3::outer(d, v)) + (2.0 * w * ph1) * id +
                (4.0 * w * ph2) * dd;
  // same with the roles of v and vt swapped; d changes sign, dd does not
  out.hess_tt = (st * ph) * id + (qt * ph) * Mat3::outer(vt, vt) -
                (2.0 * st * ph1) * (Mat3::outer(vt, d) + Mat3::outer(d, vt)) + (2.0 * w * ph1) * id +
                (4.0 * w * ph2) * dd;
  out.hess_vt = (-2.0 * sv * ph1) * Mat3::outer(v, d) + (2.0 * st * ph1) * Mat3::outer(d, vt) -
                (4.0 * w * ph2) * dd - (2.0 * w * ph1) * id;
  return out;
}

inline PairTestFunction PairTestFunction::cost(const CostParams& params) {
  PairTestFunction f;
  f.value = [params](const Vec3& v, const Vec3& vt) { return landau::cost(v, vt, params); };
  f.derivatives = [params](const Vec3& v, const Vec3& vt) { return cost_derivatives(v, vt, params); };
  return f;
}

/// Central finite-difference derivatives of psi, step h = rel_step * (1 + max(|v|, |vt|)).
inline PairDerivatives fd_pair_derivatives(const std::function<double(const Vec3&, const Vec3&)>& psi,
                                           const Vec3& v, const Vec3& vt, double rel_step = 1e-5) {
  const double h = rel_step * (1.0 + std::max(norm(v), norm(vt)));
  // z = (v, vt) in R^6
  auto eval = [&](const std::array<double, 6>& z) {
    return psi(Vec3{z[0], z[1], z[2]}, Vec3{z[3], z[4], z[5]});
  };
  const std::array<double, 6> z0{v.x, v.y, v.z, vt.x, vt.y, vt.z};
  const double f0 = eval(z0);
  double g[6];
  double hs[6][6];
  for (int a = 0; a < 6; ++a) {
    auto zp = z0, zm = z0;
    zp[a] += h;
    zm[a] -= h;
    const double fp = eval(zp), fm = eval(zm);
    g[a] = (fp - fm) / (2.0 * h);
    hs[a][a] = (fp - 2.0 * f0 + fm) / (h * h);
  }
  for (int a = 0; a < 6; ++a)
    for (int b = a + 1; b < 6; ++b) {
      auto zpp = z0, zpm = z0, zmp = z0, zmm = z0;
      zpp[a] += h, zpp[b] += h;
      zpm[a] += h, zpm[b] -= h;
      zmp[a] -= h, zmp[b] += h;
      zmm[a] -= h, zmm[b] -= h;
      hs[a][b] = hs[b][a] = (eval(zpp) - eval(zpm) - eval(zmp) + eval(zmm)) / (4.0 * h * h);
    }
  PairDerivatives out;
  out.value = f0;
  for (std::size_t k = 0; k < 3; ++k) {
    out.grad_v[k] = g[k];
    out.grad_vt[k] = g[k + 3];
    for (std::size_t l = 0; l < 3; ++l) {
      out.hess_vv(k, l) = hs[k][l];
      out.hess_tt(k, l) = hs[k + 3][l + 3];
      out.hess_vt(k, l) = hs[k][l + 3];
    }
  }
  return out;
}

/// L phi(v, v*) = 1/2 a(x) : D^2 phi(v) + b(x) . grad phi(v), x = v - v*.
inline double L_apply(const TestFunction& phi, const Vec3& v, const Vec3& v_star, Gamma gamma) {
  const Vec3 x = v - v_star;
  return 0.5 * frobenius_inner(a_matrix(x, gamma), phi.hessian(v)) + dot(b_vector(x, gamma), phi.gradient(v));
}

/// L applied to |v|^p in closed form:
///   p|v|^{p-2} v.b(x) + (p/2)|v|^{p-2} ||sigma(x)||^2 + (p(p-2)/2)|v|^{p-4} |sigma(x) v|^2.
inline double L_moment_monomial(double p, const Vec3& v, const Vec3& v_star, Gamma gamma) {
  if (!(p >= 2.0)) throw std::invalid_argument("L_moment_monomial: p must be >= 2");
  const Vec3 x = v - v_star;
  const double nv = norm(v);
  const double vp2 = pow_nonneg(nv, p - 2.0);
  const double sig2 = 2.0 * pow_nonneg(norm(x), gamma.value() + 2.0);
  double out = p * vp2 * dot(v, b_vector(x, gamma)) + 0.5 * p * vp2 * sig2;
  if (nv > 0.0 && p != 2.0) out += 0.5 * p * (p - 2.0) * vp2 * norm2(sigma_apply(x, v, gamma)) / (nv * nv);
  return out;
}

/// Individual contributions to A psi; their sum is A psi and the sum of their
/// absolute values is a natural scale for relative comparisons.
struct GeneratorTerms {
  double drift_v{0.0};
  double drift_vt{0.0};
  double diffusion_v{0.0};
  double diffusion_vt{0.0};
  double cross{0.0};

  double total() const { return drift_v + drift_vt + diffusion_v + diffusion_vt + cross; }
  double abs_scale() const {
    return std::abs(drift_v) + std::abs(drift_vt) + std::abs(diffusion_v) + std::abs(diffusion_vt) + std::abs(cross);
  }
};

/// Coupling generator
///   A psi = b(x).grad_v psi + b(xt).grad_vt psi + 1/2 a(x):D_vv psi + 1/2 a(xt):D_vtvt psi
///           + sum_{j,k,l} sigma_kj(x) sigma_lj(xt) d^2 psi / dv_k dvt_l
/// with x = v - v*, xt = vt - vt*.
inline GeneratorTerms A_terms(const PairDerivatives& d, const Quadruple& q, Gamma gamma) {
  const Vec3 x = q.v - q.v_star;
  const Vec3 xt = q.vt - q.vt_star;
  GeneratorTerms t;
  t.drift_v = dot(b_vector(x, gamma), d.grad_v);
  t.drift_vt = dot(b_vector(xt, gamma), d.grad_vt);
  t.diffusion_v = 0.5 * frobenius_inner(a_matrix(x, gamma), d.hess_vv);
  t.diffusion_vt = 0.5 * frobenius_inner(a_matrix(xt, gamma), d.hess_tt);
  t.cross = frobenius_inner(sigma_matrix(x, gamma) * transpose(sigma_matrix(xt, gamma)), d.hess_vt);
  return t;
}

inline double A_apply(const PairTestFunction& psi, const Quadruple& q, Gamma gamma) {
  return A_terms(psi.derivatives(q.v, q.vt), q, gamma).total();
}

/// A c_{p,eps}(q) from the analytic derivatives.
inline GeneratorTerms A_cost_terms(const Quadruple& q, const CostParams& params, Gamma gamma) {
  return A_terms(cost_derivatives(q.v, q.vt, params), q, gamma);
}

/// The five terms k1, k2, k2~, k3, k3~ bounding A c_{p,eps}.
struct KTerms {
  double k1{0.0};
  double k2{0.0};
  double k2_tilde{0.0};
  double k3{0.0};
  double k3_tilde{0.0};

  double sum() const { return k1 + k2 + k2_tilde + k3 + k3_tilde; }
};

namespace detail {

// phi(|v - vt|^2) [p|v|^{p-2} v.b(x) + p/2 |v|^{p-2} ||sigma(x)||^2 + p(p-2)/2 |v|^{p-4} |sigma(x)v|^2]
inline double k2_term(double p, double ph, const Vec3& v, const Vec3& x, Gamma gamma) {
  return ph * L_moment_monomial(p, v, v - x, gamma);
}

// 2p |v|^{p-2} phi' [sigma(x) v] . [(sigma(x) - sigma(xt)) (v - vt)]
inline double k3_term(double p, double ph1, const Vec3& v, const Vec3& vt, const Vec3& x, const Vec3& xt,
                      Gamma gamma) {
  const Vec3 d = v - vt;
  const Vec3 sd = sigma_apply(x, d, gamma) - sigma_apply(xt, d, gamma);
  return 2.0 * p * pow_nonneg(norm(v), p - 2.0) * ph1 * dot(sigma_apply(x, v, gamma), sd);
}

}  // namespace detail

inline KTerms k_terms(double p, double eps, const Quadruple& q, Gamma gamma) {
  const CostParams params{p, eps};
  params.validate();
  const Vec3 x = q.v - q.v_star;
  const Vec3 xt = q.vt - q.vt_star;
  const Vec3 d = q.v - q.vt;
  const double r = norm2(d);
  const double ph = phi_eps(r, eps);
  const double ph1 = phi_eps_d1(r, eps);
  const double w = moment_weight(q.v, q.vt, p);
  const Mat3 ds = sigma_matrix(x, gamma) - sigma_matrix(xt, gamma);

  KTerms k;
  k.k1 = w * ph1 * (2.0 * dot(d, b_vector(x, gamma) - b_vector(xt, gamma)) + frobenius_norm2(ds));
  k.k2 = detail::k2_term(p, ph, q.v, x, gamma);
  k.k2_tilde = detail::k2_term(p, ph, q.vt, xt, gamma);
  k.k3 = detail::k3_term(p, ph1, q.v, q.vt, x, xt, gamma);
  k.k3_tilde = detail::k3_term(p, ph1, q.vt, q.v, xt, x, gamma);
  return k;
}

/// A c_{p,eps} - sum of k-terms = 2 (1 + |v|^p + |vt|^p) |(sigma(x) - sigma(xt))(v - vt)|^2 phi''  (<= 0).
inline double ito_remainder(double p, double eps, const Quadruple& q, Gamma gamma) {
  const Vec3 x = q.v - q.v_star;
  const Vec3 xt = q.vt - q.vt_star;
  const Vec3 d = q.v - q.vt;
  const Vec3 sd = sigma_apply(x, d, gamma) - sigma_apply(xt, d, gamma);
  return 2.0 * moment_weight(q.v, q.vt, p) * norm2(sd) * phi_eps_d2(norm2(d), eps);
}

/// An inequality lhs <= base + C * coeff at one sample point. `scale` bounds the
/// magnitude of the cancelling terms that produced lhs; it sets the floating
/// point allowance used when judging the sign of lhs - base - C * coeff.
struct LinearBound {
  double lhs{0.0};
  double base{0.0};
  double coeff{0.0};
  double scale{0.0};

  double slack(double c) const { return base + c * coeff - lhs; }
};

/// Relative allowance for floating point cancellation inside lhs.
inline constexpr double kRoundingAllowance = 1e-12;

inline bool holds(const LinearBound& b, double c) {
  return b.slack(c) >= -kRoundingAllowance * b.scale;
}

/// Right side of the central inequality written as base + C * coeff.
struct CentRhs {
  double base{0.0};
  double coeff{0.0};
  double operator()(double c) const { return base + c * coeff; }
};

namespace detail {

// The four C-weighted lines shared by the central inequality and step 1.
struct CentPieces {
  double c_pg{0.0};       // c_{p+g,eps}(v, vt)
  double c_pg_star{0.0};  // c_{p+g,eps}(v*, vt*)
  double c_p{0.0};        // c_{p,eps}(v, vt)
  double c_p_star{0.0};   // c_{p,eps}(v*, vt*)
  double w_p{0.0};        // 1 + |v|^p + |vt|^p
  double w_p_star{0.0};
  double w_pg{0.0};       // 1 + |v|^{p+g} + |vt|^{p+g}
  double w_pg_star{0.0};
};

inline CentPieces cent_pieces(double p, double eps, const Quadruple& q, Gamma gamma) {
  const double pg = p + gamma.value();
  const CostParams cp{p, eps};
  const CostParams cpg{pg, eps};
  CentPieces s;
  s.c_pg = cost(q.v, q.vt, cpg);
  s.c_pg_star = cost(q.v_star, q.vt_star, cpg);
  s.c_p = cost(q.v, q.vt, cp);
  s.c_p_star = cost(q.v_star, q.vt_star, cp);
  s.w_p = moment_weight(q.v, q.vt, p);
  s.w_p_star = moment_weight(q.v_star, q.vt_star, p);
  s.w_pg = moment_weight(q.v, q.vt, pg);
  s.w_pg_star = moment_weight(q.v_star, q.vt_star, pg);
  return s;
}

inline double cent_coeff(const CentPieces& s, double eps) {
  const double se = std::sqrt(eps);
  return se * s.w_p_star * s.c_pg + se * s.w_p * s.c_pg_star + s.w_pg_star * s.c_p / se + s.w_pg * s.c_p_star / se;
}

}  // namespace detail

inline CentRhs cent_rhs_parts(double p, double eps, const Quadruple& q, Gamma gamma) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("central inequality needs eps in (0, 1]");
  CostParams{p, eps}.validate();
  const auto s = detail::cent_pieces(p, eps, q, gamma);
  return {(2.0 - p) * s.c_pg, detail::cent_coeff(s, eps)};
}

/// Five-line right side of the central inequality with constant C.
inline double cent_rhs(double p, double eps, const Quadruple& q, Gamma gamma, double c) {
  return cent_rhs_parts(p, eps, q, gamma)(c);
}

/// A c_{p,eps}(q) <= cent_rhs(C) as a linear bound in C.
inline LinearBound cent_bound(double p, double eps, const Quadruple& q, Gamma gamma) {
  const auto terms = A_cost_terms(q, {p, eps}, gamma);
  const auto rhs = cent_rhs_parts(p, eps, q, gamma);
  return {terms.total(), rhs.base, rhs.coeff, terms.abs_scale() + std::abs(rhs.base)};
}

/// The three intermediate bounds of the central inequality's proof, each as a
/// linear bound in C. i2p is checked for both k2 and k2~.
struct StepBounds {
  LinearBound i1;
  LinearBound i2p;
  LinearBound i2p_tilde;
  LinearBound i3;
};

inline StepBounds cent_step_bounds(const Quadruple& q, double p, double eps, Gamma gamma) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("step bounds need eps in (0, 1]");
  const auto k = k_terms(p, eps, q, gamma);
  const auto s = detail::cent_pieces(p, eps, q, gamma);
  const double pg = p + gamma.value();
  const double ph = phi_eps(norm2(q.v - q.vt), eps);
  const double se = std::sqrt(eps);
  const double nv = norm(q.v), nt = norm(q.vt);

  StepBounds out;
  // k1 is a sum of a drift difference and a squared diffusion difference
  const Vec3 x = q.v - q.v_star, xt = q.vt - q.vt_star;
  const double k1_scale = s.w_p * phi_eps_d1(norm2(q.v - q.vt), eps) *
                          (2.0 * norm(q.v - q.vt) * (norm(b_vector(x, gamma)) + norm(b_vector(xt, gamma))) +
                           2.0 * (frobenius_norm2(sigma_matrix(x, gamma)) + frobenius_norm2(sigma_matrix(xt, gamma))));
  out.i1 = {k.k1, 2.0 * s.c_pg, detail::cent_coeff(s, eps), k1_scale + 2.0 * s.c_pg};

  const double k2_scale = ph * p * pow_nonneg(nv, p - 2.0) * (2.0 * pow_nonneg(norm(x), gamma.value()) * nv * norm(x) +
                                                             p * pow_nonneg(norm(x), gamma.value() + 2.0));
  out.i2p = {k.k2, -p * pow_nonneg(nv, pg) * ph, (1.0 + pow_nonneg(norm(q.v_star), pg)) * s.c_p,
             k2_scale + p * pow_nonneg(nv, pg) * ph};
  const double k2t_scale = ph * p * pow_nonneg(nt, p - 2.0) *
                           (2.0 * pow_nonneg(norm(xt), gamma.value()) * nt * norm(xt) +
                            p * pow_nonneg(norm(xt), gamma.value() + 2.0));
  out.i2p_tilde = {k.k2_tilde, -p * pow_nonneg(nt, pg) * ph, (1.0 + pow_nonneg(norm(q.vt_star), pg)) * s.c_p,
                   k2t_scale + p * pow_nonneg(nt, pg) * ph};

  const double i3_coeff = s.w_pg_star * s.c_p + s.w_pg * s.c_p_star + se * s.w_p_star * s.c_pg + se * s.w_p * s.c_pg_star;
  out.i3 = {k.k3 + k.k3_tilde, 0.0, i3_coeff, std::abs(k.k3) + std::abs(k.k3_tilde)};
  return out;
}

/// Constant-free sub-bounds from step 1 of the central inequality's proof:
///   g1 = (x - xt).(b(x) - b(xt)) + ||sigma(x) - sigma(xt)||^2 <= 2 (|x| ^ |xt|)^g |x - xt|^2
///   g2 = (v - vt).(b(x) - b(xt))    <= 2 (|x|^g + |xt|^g) |v - vt| |v* - vt*|
///   g3 = (v* - vt*).(b(x) - b(xt))  <= 2 (|x|^g + |xt|^g) [|v - vt| |v* - vt*| + |v* - vt*|^2]
struct GChain {
  LinearBound g1;
  LinearBound g2;
  LinearBound g3;
};

inline GChain g_chain(const Quadruple& q, Gamma gamma) {
  const double g = gamma.value();
  const Vec3 x = q.v - q.v_star, xt = q.vt - q.vt_star;
  const Vec3 db = b_vector(x, gamma) - b_vector(xt, gamma);
  const double nx = norm(x), nxt = norm(xt);
  const double a = norm(q.v - q.vt), as = norm(q.v_star - q.vt_star);
  const double sum_g = pow_nonneg(nx, g) + pow_nonneg(nxt, g);
  const double bscale = norm(b_vector(x, gamma)) + norm(b_vector(xt, gamma));
  const double sscale = 2.0 * (pow_nonneg(nx, g + 2.0) + pow_nonneg(nxt, g + 2.0));

  GChain out;
  const Mat3 ds = sigma_matrix(x, gamma) - sigma_matrix(xt, gamma);
  out.g1 = {dot(x - xt, db) + frobenius_norm2(ds), 2.0 * pow_nonneg(std::min(nx, nxt), g) * norm2(x - xt), 0.0,
            norm(x - xt) * bscale + 2.0 * sscale};
  out.g2 = {dot(q.v - q.vt, db), 2.0 * sum_g * a * as, 0.0, a * bscale};
  out.g3 = {dot(q.v_star - q.vt_star, db), 2.0 * sum_g * (a * as + as * as), 0.0, as * bscale};
  return out;
}

/// Result of fitting the constant of an inequality lhs <= base + C coeff.
struct ConstantFit {
  double constant{0.0};
  bool feasible{true};  // false if even the upper end of the search range is violated
  std::size_t samples{0};
  std::size_t active{0};  // samples where the bound needs C > 0
};

struct FitRange {
  double lo{1e-6};
  double hi{1e6};
  int iterations{60};
};

/// Smallest C in [lo, hi] (bisection in log C) for which every sampled bound
/// holds. Ties resolve upward: the returned value is always a feasible end.
inline ConstantFit fit_constant(const std::vector<LinearBound>& bounds, const FitRange& range = {}) {
  ConstantFit fit;
  fit.samples = bounds.size();
  auto all_hold = [&](double c) {
    return std::all_of(bounds.begin(), bounds.end(), [c](const LinearBound& b) { return holds(b, c); });
  };
  for (const auto& b : bounds)
    if (!holds(b, 0.0)) ++fit.active;
  if (all_hold(range.lo)) {
    fit.constant = range.lo;
    return fit;
  }
  if (!all_hold(range.hi)) {
    fit.constant = range.hi;
    fit.feasible = false;
    return fit;
  }
  double lo = std::log(range.lo), hi = std::log(range.hi);
  for (int it = 0; it < range.iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (all_hold(std::exp(mid)))
      hi = mid;
    else
      lo = mid;
  }
  fit.constant = std::exp(hi);
  if (!all_hold(fit.constant)) fit.constant = std::nextafter(fit.constant, std::numeric_limits<double>::infinity());
  return fit;
}

/// Largest violation (relative to the bound's scale) at constant C.
struct ViolationReport {
  std::size_t samples{0};
  std::size_t violations{0};
  double worst_relative{0.0};  // max of -slack / scale over violating samples
  std::uint64_t worst_index{0};
  double largest_relative{-std::numeric_limits<double>::infinity()};  // max of -slack / scale over all samples
};

inline void record(ViolationReport& rep, const LinearBound& b, double c, std::uint64_t index) {
  ++rep.samples;
  const double r = -b.slack(c) / std::max(b.scale, std::numeric_limits<double>::min());
  if (std::isnan(r) || r > rep.largest_relative) rep.largest_relative = r;
  if (holds(b, c)) return;
  ++rep.violations;
  const double rel = -b.slack(c) / std::max(b.scale, std::numeric_limits<double>::min());
  if (rel > rep.worst_relative) {
    rep.worst_relative = rel;
    rep.worst_index = index;
  }
}

/// Constant needed by one sample: (lhs - base - allowance) / coeff, 0 if the
/// bound holds without C, +inf if it fails and coeff = 0.
inline double required_constant(const LinearBound& b) {
  const double excess = b.lhs - b.base - kRoundingAllowance * b.scale;
  if (excess <= 0.0) return 0.0;
  if (b.coeff <= 0.0) return std::numeric_limits<double>::infinity();
  return excess / b.coeff;
}

using BoundAt = std::function<LinearBound(const Quadruple&)>;

/// Local ascent settings. Random sampling approaches the supremum of the
/// required constant only from below, so a plain sample maximum is routinely
/// exceeded by a larger fresh sample. Climbing from the worst samples closes
/// most of that gap.
struct RefineOptions {
  std::size_t starts{128};
  std::size_t iterations{4000};
};

namespace detail {

inline Quadruple perturb(const Quadruple& q, rng::Stream& s, double step) {
  auto jitter = [&](const Vec3& base) { return (step * (1.0 + norm(base))) * s.normal3(); };
  Quadruple out = q;
  switch (static_cast<int>(s.uniform() * 7.0)) {
    case 0: out.v += jitter(q.v); break;
    case 1: out.v_star += jitter(q.v_star); break;
    case 2: out.vt += jitter(q.vt); break;
    case 3: out.vt_star += jitter(q.vt_star); break;
    case 4: {  // move a coupled pair together
      const Vec3 j = jitter(q.v);
      out.v += j;
      out.vt += j;
      break;
    }
    case 5: {
      const Vec3 j = jitter(q.v_star);
      out.v_star += j;
      out.vt_star += j;
      break;
    }
    default: {  // rescale/rotate the offsets within the pairs, keeping near pairs near
      const Vec3 d = q.vt - q.v;
      out.vt = q.v + d + (step * norm(d)) * s.normal3();
      const Vec3 ds = q.vt_star - q.v_star;
      out.vt_star = q.v_star + ds + (step * norm(ds)) * s.normal3();
      break;
    }
  }
  return out;
}

}  // namespace detail

/// Hill climbing on the required constant from the given starting points.
/// Returns the best point found from each start.
inline std::vector<Quadruple> refine_worst(const BoundAt& bound_at, const std::vector<Quadruple>& starts,
                                           std::uint64_t seed, const RefineOptions& opts) {
  std::vector<Quadruple> out;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    rng::Stream s(seed, rng::Purpose::kGeneric, k);
    Quadruple best = starts[k];
    double best_c = required_constant(bound_at(best));
    double step = 0.1;
    for (std::size_t it = 0; it < opts.iterations; ++it) {
      const Quadruple cand = detail::perturb(best, s, step);
      const double c = required_constant(bound_at(cand));
      if (std::isfinite(c) && c > best_c) {
        best = cand;
        best_c = c;
        step = std::min(step * 1.5, 1.0);
      } else {
        step = std::max(step * 0.85, 1e-6);
      }
    }
    out.push_back(best);
  }
  return out;
}

struct SampledFitOptions {
  std::size_t sample_count{100000};
  std::uint64_t seed{42};
  SamplerConfig sampler{};
  FitRange range{};
  RefineOptions refine{};
};

/// Fit C for lhs <= base + C coeff over `sample_count` sampled quadruples plus
/// the locally refined worst cases.
inline ConstantFit fit_sampled(const BoundAt& bound_at, const SampledFitOptions& opts) {
  std::vector<LinearBound> bounds;
  bounds.reserve(opts.sample_count + opts.refine.starts);
  std::vector<std::pair<double, std::size_t>> need;
  for (std::size_t k = 0; k < opts.sample_count; ++k) {
    bounds.push_back(bound_at(sampling::quadruple(opts.seed, k, opts.sampler)));
    const double c = required_constant(bounds.back());
    if (c > 0.0 && std::isfinite(c)) need.push_back({c, k});
  }
  const std::size_t starts = std::min(opts.refine.starts, need.size());
  std::partial_sort(need.begin(), need.begin() + static_cast<std::ptrdiff_t>(starts), need.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  std::vector<Quadruple> seeds;
  for (std::size_t k = 0; k < starts; ++k) seeds.push_back(sampling::quadruple(opts.seed, need[k].second, opts.sampler));
  for (const auto& q : refine_worst(bound_at, seeds, opts.seed, opts.refine)) bounds.push_back(bound_at(q));
  auto fit = fit_constant(bounds, opts.range);
  fit.samples = opts.sample_count;
  return fit;
}

using CentFitOptions = SampledFitOptions;

/// Fitted constant of the central inequality for one (p, eps, gamma).
inline ConstantFit fit_cent_constant(double p, double eps, Gamma gamma, const CentFitOptions& opts) {
  return fit_sampled([&](const Quadruple& q) { return cent_bound(p, eps, q, gamma); }, opts);
}

struct CentFitEntry {
  double eps{0.0};
  double gamma{0.0};
  ConstantFit fit;
};

/// fit_cent_constant over a grid of eps and gamma values.
inline std::vector<CentFitEntry> fit_cent_constant(double p, const std::vector<double>& eps_grid,
                                                   const std::vector<double>& gamma_grid, const CentFitOptions& opts) {
  std::vector<CentFitEntry> out;
  for (double g : gamma_grid)
    for (double e : eps_grid) out.push_back({e, g, fit_cent_constant(p, e, Gamma(g), opts)});
  return out;
}

}  // namespace landau
