#pragma once

// Moments of discrete measures and the explicit moment bounds: the moment ODE
// right side, the comparison lemma for u' <= -a u^{1+alpha} + b u + c u^{1-beta},
// the explicit decay bound for m_p, and Gaussian moments.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "landau/kernel.hpp"
#include "landau/linalg.hpp"
#include "landau/numeric.hpp"
#include "landau/transport.hpp"

namespace landau {

/// m_p(F) = sum_i w_i |v_i|^p.
inline double empirical_moment(const DiscreteMeasure& f, double p) {
  if (!(p >= 0.0)) throw std::invalid_argument("empirical_moment: p must be >= 0");
  std::vector<double> terms(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) terms[i] = f.weights[i] * pow_nonneg(norm(f.points[i]), p);
  return tree_sum(terms);
}

/// Unweighted version for plain velocity arrays (uniform weights 1/N).
inline double empirical_moment(const std::vector<Vec3>& v, double p) {
  if (!(p >= 0.0)) throw std::invalid_argument("empirical_moment: p must be >= 0");
  std::vector<double> terms(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) terms[i] = pow_nonneg(norm(v[i]), p);
  return tree_sum(terms) / static_cast<double>(v.size());
}

/// -p m_{p+g} + p m_p + C p^2 [m_{p-2+g} + m_{p-2} m_{2+g}]
inline double moment_ode_rhs_bound(double p, double m_p, double m_pg, double m_p2g, double m_p2, double m_2g, double c) {
  if (!(p >= 2.0)) throw std::invalid_argument("moment_ode_rhs_bound: p must be >= 2");
  for (double m : {m_p, m_pg, m_p2g, m_p2, m_2g})
    if (!(m >= 0.0)) throw std::invalid_argument("moment_ode_rhs_bound: moments must be nonnegative");
  return -p * m_pg + p * m_p + c * p * p * (m_p2g + m_p2 * m_2g);
}

/// Coefficients of u' <= -a u^{1+alpha} + b u + c u^{1-beta}.
struct OdeParams {
  double a{1.0};
  double b{1.0};
  double c{1.0};
  double alpha{1.0};
  double beta{1.0};

  void validate() const {
    for (double x : {a, b, c, alpha, beta})
      if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("OdeParams: all entries must be positive");
  }

  double rhs(double u) const { return -a * std::pow(u, 1.0 + alpha) + b * u + c * std::pow(u, 1.0 - beta); }
};

/// (2 / (a alpha t))^{1/alpha} + (4b/a)^{1/alpha} + (4c/a)^{1/(alpha+beta)}
inline double ode_comparison_bound(const OdeParams& prm, double t) {
  prm.validate();
  if (!(t > 0.0)) throw std::invalid_argument("ode_comparison_bound: t must be positive");
  return std::pow(2.0 / (prm.a * prm.alpha * t), 1.0 / prm.alpha) + std::pow(4.0 * prm.b / prm.a, 1.0 / prm.alpha) +
         std::pow(4.0 * prm.c / prm.a, 1.0 / (prm.alpha + prm.beta));
}

/// (1 + 2/(g t))^{p/g} + (C p)^{p/2}, valid for p >= 4 under m_2(f_0) = 1.
inline double step4_moment_bound(double p, double gamma, double t, double c) {
  if (!(p >= 4.0)) throw std::invalid_argument("step4_moment_bound: p must be >= 4");
  if (!(t > 0.0)) throw std::invalid_argument("step4_moment_bound: t must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("step4_moment_bound: gamma must lie in (0, 1]");
  return std::pow(1.0 + 2.0 / (gamma * t), p / gamma) + std::pow(c * p, p / 2.0);
}

/// Smallest C >= floor with m <= step4_moment_bound(p, g, t, C); the bound is
/// increasing in C, so this is solved in closed form.
inline double step4_required_constant(double p, double gamma, double t, double m, double floor = 1e-6) {
  const double transient = std::pow(1.0 + 2.0 / (gamma * t), p / gamma);
  if (m <= transient) return floor;
  return std::max(floor, std::pow(m - transient, 2.0 / p) / p);
}

struct GaussianMoment {
  double value{0.0};
  bool clipped{false};  // some exponent hit the cutoff; value is then a lower bound
};

inline constexpr double kGaussianExponentCutoff = 700.0;

/// sum_i w_i exp(min(a |v_i|^2, cutoff)).
inline GaussianMoment gaussian_moment(const DiscreteMeasure& f, double a, double cutoff = kGaussianExponentCutoff) {
  if (!(a > 0.0)) throw std::invalid_argument("gaussian_moment: a must be positive");
  GaussianMoment out;
  std::vector<double> terms(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    double e = a * norm2(f.points[i]);
    if (e > cutoff) {
      e = cutoff;
      out.clipped = true;
    }
    terms[i] = f.weights[i] * std::exp(e);
  }
  out.value = tree_sum(terms);
  return out;
}

/// Divide velocities by sqrt(m_2) so that the rescaled measure has m_2 = 1.
/// Times are not rescaled.
inline std::vector<Vec3> normalize_energy(std::vector<Vec3> v) {
  const double m2 = empirical_moment(v, 2.0);
  if (!(m2 > 0.0)) throw std::invalid_argument("normalize_energy: m_2 must be positive");
  const double s = 1.0 / std::sqrt(m2);
  for (auto& x : v) x *= s;
  return v;
}

/// For m_2 = 1 and beta > alpha >= 2: m_alpha <= m_beta^{(alpha-2)/(beta-2)}.
/// Returns bound - m_alpha (nonnegative when the inequality holds).
inline double interpolation_slack(const std::vector<Vec3>& normalized, double alpha, double beta) {
  if (!(beta > alpha && alpha >= 2.0)) throw std::invalid_argument("interpolation needs beta > alpha >= 2");
  const double ma = empirical_moment(normalized, alpha);
  const double mb = empirical_moment(normalized, beta);
  return std::pow(mb, (alpha - 2.0) / (beta - 2.0)) - ma;
}

/// Moments m_p(f_t) on a time grid.
struct MomentSeries {
  std::vector<double> times;
  std::vector<double> orders;
  std::vector<std::vector<double>> values;  // values[t][k] = m_{orders[k]}(f_{times[t]})

  void append(double t, const std::vector<Vec3>& v) {
    if (!times.empty() && !(t > times.back())) throw std::invalid_argument("MomentSeries: times must increase");
    times.push_back(t);
    std::vector<double> row;
    for (double p : orders) row.push_back(empirical_moment(v, p));
    values.push_back(std::move(row));
  }
};

}  // namespace landau
