#pragma once

// Sampled identity and inequality suites. Each suite returns its sample count,
// number of violations, the worst relative violation with the offending
// sample, and any fitted constants.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "landau/generators.hpp"
#include "landau/kernel.hpp"
#include "landau/linalg.hpp"
#include "landau/rng.hpp"
#include "landau/sampling.hpp"
#include "landau/transport.hpp"

namespace landau::verify {

struct NamedValue {
  std::string name;
  double value{0.0};
};

struct SuiteResult {
  std::string name;
  std::size_t samples{0};
  std::size_t violations{0};
  double tolerance{0.0};
  double worst{0.0};  // largest relative violation seen (0 if none)
  double largest{-std::numeric_limits<double>::infinity()};  // largest relative excess, violated or not
  std::vector<NamedValue> worst_sample;
  std::map<std::string, double> constants;
  std::vector<std::string> notes;

  bool passed() const { return violations == 0; }
};

inline SuiteResult make_result(std::string name, double tolerance) {
  SuiteResult r;
  r.name = std::move(name);
  r.tolerance = tolerance;
  return r;
}

namespace detail {

inline void push_vec(std::vector<NamedValue>& out, const std::string& name, const Vec3& v) {
  out.push_back({name + ".x", v.x});
  out.push_back({name + ".y", v.y});
  out.push_back({name + ".z", v.z});
}

inline std::vector<NamedValue> describe(const Quadruple& q) {
  std::vector<NamedValue> out;
  push_vec(out, "v", q.v);
  push_vec(out, "v_star", q.v_star);
  push_vec(out, "vt", q.vt);
  push_vec(out, "vt_star", q.vt_star);
  return out;
}

/// Records `excess` (positive means violated) relative to `scale`.
class Tally {
 public:
  Tally(SuiteResult& r) : r_(r) {}
  void check(double excess, double scale, const std::function<std::vector<NamedValue>()>& sample) {
    const double rel = excess / std::max(scale, std::numeric_limits<double>::min());
    if (std::isnan(rel) || rel > r_.largest) r_.largest = rel;
    if (!(rel <= r_.tolerance)) {  // also catches NaN
      ++r_.violations;
      if (!(rel <= r_.worst)) {
        r_.worst = std::isfinite(rel) ? rel : std::numeric_limits<double>::infinity();
        r_.worst_sample = sample();
      }
    }
  }

 private:
  SuiteResult& r_;
};

/// gamma in (0, 1], with the endpoint and 1/2 drawn with positive probability.
inline double draw_gamma(rng::Stream& s) {
  const double u = s.uniform();
  if (u < 0.25) return 1.0;
  if (u < 0.5) return 0.5;
  return 1.0 - s.uniform();
}

}  // namespace detail

struct KernelSuiteOptions {
  std::size_t samples{1000000};
  std::uint64_t seed{1};
  double tolerance{1e-10};
  SamplerConfig sampler{};
};

/// Algebraic identities and elementary inequalities of the collision
/// coefficients, one sample = (x, xt, v, v*, gamma, a, b, alpha).
inline std::vector<SuiteResult> kernel_suite(const KernelSuiteOptions& o) {
  const std::vector<std::string> names{"sigma_squared_equals_a", "trace_a",          "a_annihilates_x",
                                       "projector",              "sigma_inner",      "sigma_inner_lower",
                                       "b_lipschitz",            "sigma_difference", "sigma_difference_chain",
                                       "power_difference",       "sigma_v_equals_sigma_vstar"};
  std::vector<SuiteResult> res(names.size());
  for (std::size_t k = 0; k < names.size(); ++k) {
    res[k].name = names[k];
    res[k].tolerance = o.tolerance;
  }
  SuiteResult tr_bound;
  tr_bound.name = "sigma_v_bound";
  tr_bound.tolerance = o.tolerance;
  double tr_ratio = 0.0;

  for (std::size_t n = 0; n < o.samples; ++n) {
    const Quadruple q = sampling::quadruple(o.seed, n, o.sampler);
    rng::Stream s(o.seed, rng::Purpose::kGeneric, n);
    const double g = detail::draw_gamma(s);
    const Gamma gamma(g);
    const Vec3 x = q.v - q.v_star;
    const Vec3 xt = q.vt - q.vt_star;
    auto sample = [&]() {
      auto d = detail::describe(q);
      d.push_back({"gamma", g});
      return d;
    };
    for (auto& r : res) ++r.samples;

    const Mat3 a = a_matrix(x, gamma);
    const Mat3 sg = sigma_matrix(x, gamma);
    const double an = frobenius_norm(a);
    const double nx = norm(x);
    detail::Tally(res[0]).check(frobenius_norm(sg * sg - a), an, sample);
    const double tr_exact = 2.0 * pow_nonneg(nx, g + 2.0);
    detail::Tally(res[1]).check(std::abs(trace(a) - tr_exact), tr_exact, sample);
    detail::Tally(res[2]).check(norm(a * x), an * nx, sample);
    if (nx > 0.0) {
      const Mat3 p = proj_perp(x);
      const double err = std::max({frobenius_norm(p * p - p), frobenius_norm(p - transpose(p)), norm(p * x) / nx,
                                   std::abs(trace(p) - 2.0)});
      detail::Tally(res[3]).check(err, 1.0, sample);
    }
    const Mat3 sgt = sigma_matrix(xt, gamma);
    const double inner = sigma_inner(x, xt, gamma);
    detail::Tally(res[4]).check(std::abs(inner - frobenius_inner(sg, sgt)), frobenius_norm(sg) * frobenius_norm(sgt), sample);
    const double lower = 2.0 * pow_nonneg(nx, 0.5 * g) * pow_nonneg(norm(xt), 0.5 * g) * dot(x, xt);
    detail::Tally(res[5]).check(lower - inner, std::abs(lower) + std::abs(inner), sample);

    const double nxt = norm(xt);
    const double dx = norm(x - xt);
    const double gx = pow_nonneg(nx, g), gxt = pow_nonneg(nxt, g);
    const double lip = 2.0 * (gx + gxt) * dx;
    detail::Tally(res[6]).check(norm(b_vector(x, gamma) - b_vector(xt, gamma)) - lip,
                                norm(b_vector(x, gamma)) + norm(b_vector(xt, gamma)), sample);
    const double sd = frobenius_norm2(sg - sgt);
    const Vec3 hx = pow_nonneg(nx, 0.5 * g) * x - pow_nonneg(nxt, 0.5 * g) * xt;
    const double mid = 2.0 * norm2(hx);
    const double hscale = 2.0 * (pow_nonneg(nx, g + 2.0) + pow_nonneg(nxt, g + 2.0));
    detail::Tally(res[7]).check(sd - mid, hscale, sample);
    const double chain = 2.0 * std::pow(pow_nonneg(nx, 0.5 * g) + pow_nonneg(nxt, 0.5 * g), 2.0) * dx * dx;
    detail::Tally(res[8]).check(mid - chain, hscale, sample);

    // |A^al - B^al| <= (A v B)^{al-1} |A - B| on nonnegative reals
    const double ra = norm(q.v), rb = norm(q.vt), al = 1.0 - s.uniform();
    const double lhs = std::abs(pow_nonneg(ra, al) - pow_nonneg(rb, al));
    const double rhs = std::max(ra, rb) > 0.0 ? std::pow(std::max(ra, rb), al - 1.0) * std::abs(ra - rb) : 0.0;
    detail::Tally(res[9]).check(lhs - rhs, pow_nonneg(ra, al) + pow_nonneg(rb, al), sample);

    const Vec3 sv = sigma_apply(x, q.v, gamma);
    const Vec3 svs = sigma_apply(x, q.v_star, gamma);
    detail::Tally(res[10]).check(norm(sv - svs), frobenius_norm(sg) * (norm(q.v) + norm(q.v_star)), sample);

    ++tr_bound.samples;
    const double tr_rhs = pow_nonneg(nx, 0.5 * g) * norm(q.v) * norm(q.v_star);
    if (tr_rhs > 0.0) tr_ratio = std::max(tr_ratio, norm(sv) / tr_rhs);
  }
  // |sigma(v - v*) v| <= C |v - v*|^{g/2} |v| |v*| with C = 2; the fitted value is reported
  tr_bound.constants["fitted"] = tr_ratio;
  tr_bound.constants["asserted"] = 2.0;
  tr_bound.largest = tr_ratio / 2.0 - 1.0;
  if (tr_ratio > 2.0 * (1.0 + o.tolerance)) {
    tr_bound.violations = 1;
    tr_bound.worst = tr_ratio / 2.0 - 1.0;
  }
  res.push_back(tr_bound);
  return res;
}

struct PhiSuiteOptions {
  std::size_t samples{1000000};
  std::uint64_t seed{2};
  double tolerance{1e-12};
};

/// r phi' <= phi, 0 <= phi' <= 1, phi'' <= 0 on (r, eps) in [0, 100] x (0, 1],
/// and c_{p,1} <= c_{p,eps} <= c_{p,1} / eps.
inline std::vector<SuiteResult> phi_suite(const PhiSuiteOptions& o) {
  SuiteResult shape = make_result("phi_shape", o.tolerance);
  SuiteResult sandwich = make_result("cost_sandwich", o.tolerance);
  for (std::size_t n = 0; n < o.samples; ++n) {
    rng::Stream s(o.seed, rng::Purpose::kSampler, n);
    const double r = 100.0 * s.uniform(), e = 1.0 - s.uniform();
    const double f = phi_eps(r, e), f1 = phi_eps_d1(r, e), f2 = phi_eps_d2(r, e);
    auto sample = [&]() { return std::vector<NamedValue>{{"r", r}, {"eps", e}}; };
    ++shape.samples;
    detail::Tally t(shape);
    t.check(r * f1 - f, f, sample);
    t.check(std::max(-f1, f1 - 1.0), 1.0, sample);
    t.check(f2, std::abs(f2) + 1.0, sample);

    const Vec3 v = 3.0 * s.normal3(), w = 3.0 * s.normal3();
    const double p = 2.0 + 4.0 * s.uniform();
    const double c1 = cost(v, w, {p, 1.0}), ce = cost(v, w, {p, e});
    ++sandwich.samples;
    detail::Tally ts(sandwich);
    auto sample2 = [&]() {
      std::vector<NamedValue> d;
      detail::push_vec(d, "v", v);
      detail::push_vec(d, "w", w);
      d.push_back({"p", p});
      d.push_back({"eps", e});
      return d;
    };
    ts.check(c1 - ce, ce, sample2);
    ts.check(ce - c1 / e, ce, sample2);
  }
  return {shape, sandwich};
}

struct ConservationSuiteOptions {
  std::size_t samples{1000000};
  std::uint64_t seed{3};
  double tolerance{1e-12};
};

/// L phi(v, v*) + L phi(v*, v) = 0 for phi in {v_1, v_2, v_3, |v|^2}.
inline SuiteResult conservation_suite(const ConservationSuiteOptions& o) {
  SuiteResult r = make_result("weak_conservation", o.tolerance);
  const TestFunction fs[4] = {TestFunction::coordinate(0), TestFunction::coordinate(1), TestFunction::coordinate(2),
                              TestFunction::monomial(2.0)};
  SamplerConfig cfg;
  for (std::size_t n = 0; n < o.samples; ++n) {
    rng::Stream s(o.seed, rng::Purpose::kSampler, n);
    const Vec3 v = sampling::point(s, cfg), vs = sampling::point(s, cfg);
    const Gamma gamma(detail::draw_gamma(s));
    ++r.samples;
    // size of the summands of L phi, which cancel among themselves
    const double scale = 4.0 * (1.0 + norm(v) + norm(vs)) * pow_nonneg(norm(v - vs), 1.0 + gamma.value());
    for (const auto& f : fs) {
      const double a = L_apply(f, v, vs, gamma), b = L_apply(f, vs, v, gamma);
      detail::Tally(r).check(std::abs(a + b), scale, [&]() {
        std::vector<NamedValue> d;
        detail::push_vec(d, "v", v);
        detail::push_vec(d, "v_star", vs);
        d.push_back({"gamma", gamma.value()});
        return d;
      });
    }
  }
  return r;
}

/// A parameter triple for the generator suites.
struct GeneratorParams {
  double p;
  double eps;
  double gamma;
};

inline GeneratorParams draw_params(rng::Stream& s, bool allow_eps_zero) {
  static constexpr double ps[] = {2.0, 2.5, 3.0, 4.0, 6.0};
  static constexpr double es[] = {0.0, 0.05, 0.25, 1.0};
  GeneratorParams g;
  g.p = s.uniform() < 0.5 ? ps[static_cast<int>(s.uniform() * 5.0)] : 2.0 + 4.0 * s.uniform();
  g.eps = s.uniform() < 0.5 ? es[static_cast<int>(s.uniform() * 4.0)] : s.uniform();
  if (!allow_eps_zero && g.eps == 0.0) g.eps = 0.05;
  g.gamma = detail::draw_gamma(s);
  return g;
}

struct ItoSuiteOptions {
  std::size_t samples{100000};
  std::uint64_t seed{4};
  double tolerance{1e-8};
  SamplerConfig sampler{};
};

/// A c_{p,eps} from analytic derivatives minus the five k-terms equals the
/// closed-form remainder, and is nonpositive.
inline std::vector<SuiteResult> ito_suite(const ItoSuiteOptions& o) {
  SuiteResult ident = make_result("ito_remainder_identity", o.tolerance);
  SuiteResult sign = make_result("ito_remainder_sign", o.tolerance);
  for (std::size_t n = 0; n < o.samples; ++n) {
    const Quadruple q = sampling::quadruple(o.seed, n, o.sampler);
    rng::Stream s(o.seed, rng::Purpose::kGeneric, n);
    const auto prm = draw_params(s, true);
    const Gamma gamma(prm.gamma);
    const auto terms = A_cost_terms(q, {prm.p, prm.eps}, gamma);
    const auto k = k_terms(prm.p, prm.eps, q, gamma);
    const double rem = ito_remainder(prm.p, prm.eps, q, gamma);
    const double scale = terms.abs_scale() + std::abs(k.k1) + std::abs(k.k2) + std::abs(k.k2_tilde) + std::abs(k.k3) +
                         std::abs(k.k3_tilde) + std::abs(rem);
    auto sample = [&]() {
      auto d = detail::describe(q);
      d.push_back({"p", prm.p});
      d.push_back({"eps", prm.eps});
      d.push_back({"gamma", prm.gamma});
      return d;
    };
    const double diff = terms.total() - k.sum();
    ++ident.samples;
    ++sign.samples;
    detail::Tally(ident).check(std::abs(diff - rem), scale, sample);
    detail::Tally(sign).check(diff, scale, sample);
  }
  return {ident, sign};
}

struct FdSuiteOptions {
  std::size_t samples{10000};
  std::uint64_t seed{5};
  double tolerance{1e-4};
  double box{10.0};
};

/// A c_{p,eps} with analytic derivatives against central finite differences,
/// coordinates uniform in [-box, box].
inline SuiteResult fd_suite(const FdSuiteOptions& o) {
  SuiteResult r = make_result("analytic_vs_finite_difference", o.tolerance);
  for (std::size_t n = 0; n < o.samples; ++n) {
    rng::Stream s(o.seed, rng::Purpose::kSampler, n);
    auto box = [&]() { return Vec3{o.box * (2 * s.uniform() - 1), o.box * (2 * s.uniform() - 1), o.box * (2 * s.uniform() - 1)}; };
    Quadruple q;
    q.v = box();
    q.v_star = box();
    q.vt = box();
    q.vt_star = box();
    const auto prm = draw_params(s, true);
    const Gamma gamma(prm.gamma);
    const CostParams cp{prm.p, prm.eps};
    const auto an = A_terms(cost_derivatives(q.v, q.vt, cp), q, gamma);
    const auto fd =
        A_terms(fd_pair_derivatives([&](const Vec3& a, const Vec3& b) { return cost(a, b, cp); }, q.v, q.vt), q, gamma);
    ++r.samples;
    detail::Tally(r).check(std::abs(an.total() - fd.total()), an.abs_scale(), [&]() {
      auto d = detail::describe(q);
      d.push_back({"p", prm.p});
      d.push_back({"eps", prm.eps});
      d.push_back({"gamma", prm.gamma});
      return d;
    });
  }
  return r;
}

struct CentSuiteOptions {
  std::vector<double> p_grid{2.5, 3.0, 4.0};
  std::vector<double> gamma_grid{0.5, 1.0};
  std::vector<double> eps_grid{0.05, 0.25, 1.0};
  std::size_t fit_samples{100000};
  std::size_t validation_samples{1000000};
  std::uint64_t fit_seed{42};
  std::uint64_t validation_seed{4242};
  SamplerConfig sampler{};
  RefineOptions refine{};
};

namespace detail {

inline SuiteResult fit_and_validate(const std::string& name, const BoundAt& bound_at, const CentSuiteOptions& o) {
  SampledFitOptions fo;
  fo.sample_count = o.fit_samples;
  fo.seed = o.fit_seed;
  fo.sampler = o.sampler;
  fo.refine = o.refine;
  const auto fit = fit_sampled(bound_at, fo);
  SuiteResult r;
  r.name = name;
  r.tolerance = kRoundingAllowance;
  r.constants["C_fit"] = fit.constant;
  r.constants["fit_samples"] = static_cast<double>(fit.samples);
  r.constants["active_samples"] = static_cast<double>(fit.active);
  if (!fit.feasible) r.notes.push_back("no feasible constant in the search range");
  ViolationReport rep;
  for (std::size_t k = 0; k < o.validation_samples; ++k) {
    const Quadruple q = sampling::quadruple(o.validation_seed, k, o.sampler);
    record(rep, bound_at(q), fit.constant, k);
  }
  r.samples = rep.samples;
  r.violations = rep.violations + (fit.feasible ? 0 : 1);
  r.worst = rep.worst_relative;
  r.largest = rep.largest_relative;
  if (rep.violations > 0) r.worst_sample = describe(sampling::quadruple(o.validation_seed, rep.worst_index, o.sampler));
  return r;
}

inline std::string combo_name(const std::string& base, double p, double g, double e) {
  auto fmt = [](double x) {
    std::string s = std::to_string(x);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };
  return base + "[p=" + fmt(p) + ",gamma=" + fmt(g) + ",eps=" + fmt(e) + "]";
}

}  // namespace detail

/// Fit-then-validate of the central inequality and of its three intermediate
/// bounds, for every (p, gamma, eps) of the grid. Also checks the g-chain
/// sub-bounds, which carry no constant.
inline std::vector<SuiteResult> cent_suite(const CentSuiteOptions& o) {
  std::vector<SuiteResult> out;
  for (double p : o.p_grid)
    for (double g : o.gamma_grid)
      for (double e : o.eps_grid) {
        const Gamma gamma(g);
        out.push_back(detail::fit_and_validate(detail::combo_name("central", p, g, e),
                                               [&](const Quadruple& q) { return cent_bound(p, e, q, gamma); }, o));
        out.push_back(detail::fit_and_validate(detail::combo_name("step_i1", p, g, e),
                                               [&](const Quadruple& q) { return cent_step_bounds(q, p, e, gamma).i1; }, o));
        out.push_back(detail::fit_and_validate(
            detail::combo_name("step_i2p", p, g, e), [&](const Quadruple& q) { return cent_step_bounds(q, p, e, gamma).i2p; },
            o));
        out.push_back(detail::fit_and_validate(detail::combo_name("step_i2p_tilde", p, g, e),
                                               [&](const Quadruple& q) { return cent_step_bounds(q, p, e, gamma).i2p_tilde; },
                                               o));
        out.push_back(detail::fit_and_validate(detail::combo_name("step_i3", p, g, e),
                                               [&](const Quadruple& q) { return cent_step_bounds(q, p, e, gamma).i3; }, o));
      }
  return out;
}

/// g1, g2, g3 sub-bounds on sampled quadruples (no fitted constant).
inline std::vector<SuiteResult> g_chain_suite(std::size_t samples, std::uint64_t seed, const SamplerConfig& sampler = {}) {
  SuiteResult r1 = make_result("g1_chain", kRoundingAllowance), r2 = make_result("g2_chain", kRoundingAllowance),
      r3 = make_result("g3_chain", kRoundingAllowance);
  for (std::size_t n = 0; n < samples; ++n) {
    const Quadruple q = sampling::quadruple(seed, n, sampler);
    rng::Stream s(seed, rng::Purpose::kGeneric, n);
    const Gamma gamma(detail::draw_gamma(s));
    const auto g = g_chain(q, gamma);
    auto sample = [&]() {
      auto d = detail::describe(q);
      d.push_back({"gamma", gamma.value()});
      return d;
    };
    for (auto [res, b] : {std::pair{&r1, g.g1}, std::pair{&r2, g.g2}, std::pair{&r3, g.g3}}) {
      ++res->samples;
      detail::Tally(*res).check(b.lhs - b.base, b.scale, sample);
    }
  }
  return {r1, r2, r3};
}

/// For p > 2, A c_{p,eps} < 0 once |v| is large with the other three points
/// bounded. Reports the smallest radius on a geometric grid beyond which every
/// sampled configuration is negative.
inline SuiteResult povzner_suite(double p, double eps, Gamma gamma, std::size_t configs, std::uint64_t seed) {
  SuiteResult r;
  r.name = "povzner_sign";
  std::vector<double> radii;
  for (double R = 1.0; R <= 1e6; R *= 2.0) radii.push_back(R);
  std::size_t last_bad = 0;  // index into radii of the last radius with a nonnegative value, +1
  for (std::size_t n = 0; n < configs; ++n) {
    rng::Stream s(seed, rng::Purpose::kSampler, n);
    Quadruple q;
    q.v_star = s.normal3();
    q.vt = s.normal3();
    q.vt_star = s.normal3();
    const Vec3 u = s.unit_vector();
    for (std::size_t k = 0; k < radii.size(); ++k) {
      q.v = radii[k] * u;
      ++r.samples;
      if (!(A_cost_terms(q, {p, eps}, gamma).total() < 0.0)) last_bad = std::max(last_bad, k + 1);
    }
  }
  r.constants["threshold_radius"] = last_bad < radii.size() ? radii[last_bad] : std::numeric_limits<double>::infinity();
  if (last_bad >= radii.size()) r.violations = 1;
  return r;
}

/// |L phi(v, v*)| <= C (1 + |v| + |v*|)^{2+gamma} for bounded smooth phi; the
/// constant is fitted on two disjoint sample sets and must agree within 25%.
inline SuiteResult growth_suite(std::size_t samples, std::uint64_t seed) {
  SuiteResult r;
  r.name = "generator_growth";
  const TestFunction fs[] = {TestFunction::gaussian_bump({0.5, -0.3, 0.2}, 1.0), TestFunction::plane_wave({0.7, 0.2, -0.4})};
  double c[2] = {0.0, 0.0};
  SamplerConfig cfg;
  for (int half = 0; half < 2; ++half)
    for (std::size_t n = 0; n < samples; ++n) {
      rng::Stream s(seed + static_cast<std::uint64_t>(half), rng::Purpose::kSampler, n);
      const Vec3 v = sampling::point(s, cfg), vs = sampling::point(s, cfg);
      const Gamma gamma(detail::draw_gamma(s));
      const double w = std::pow(1.0 + norm(v) + norm(vs), 2.0 + gamma.value());
      for (const auto& f : fs) c[half] = std::max(c[half], std::abs(L_apply(f, v, vs, gamma)) / w);
      ++r.samples;
    }
  r.constants["C_first"] = c[0];
  r.constants["C_second"] = c[1];
  const double ratio = c[1] / c[0];
  r.constants["ratio"] = ratio;
  if (!(ratio > 0.8 && ratio < 1.25)) r.violations = 1;
  return r;
}

/// |v - w|^p <= C c_{p,1}(v, w): fitted constant (the bound behind W_p^p <= C T_p).
inline SuiteResult domination_suite(double p, std::size_t samples, std::uint64_t seed) {
  SuiteResult r;
  r.name = "wasserstein_domination";
  double c = 0.0;
  SamplerConfig cfg;
  for (std::size_t n = 0; n < samples; ++n) {
    rng::Stream s(seed, rng::Purpose::kSampler, n);
    const Vec3 v = sampling::point(s, cfg), w = sampling::point(s, cfg);
    const double den = cost(v, w, {p, 1.0});
    if (den > 0.0) c = std::max(c, pow_nonneg(norm(v - w), p) / den);
    ++r.samples;
  }
  r.constants["C_fit"] = c;
  if (!std::isfinite(c)) r.violations = 1;
  return r;
}

/// Relaxed triangle inequality for T_{p,eps} on random triples of uniform
/// discrete measures, with the constant estimated from point triples.
inline SuiteResult measure_rti_suite(const CostParams& params, std::size_t triples, std::size_t atoms,
                                     std::size_t point_samples, std::uint64_t seed) {
  SuiteResult r;
  r.name = "measure_relaxed_triangle";
  r.tolerance = 1e-12;
  const auto est = rti_constant_estimate(params, point_samples, seed);
  r.constants["C_point_estimate"] = est.max_ratio;
  double worst_ratio = 0.0;
  SamplerConfig cfg;
  for (std::size_t t = 0; t < triples; ++t) {
    rng::Stream s(seed + 1, rng::Purpose::kSampler, t);
    auto draw = [&]() {
      std::vector<Vec3> pts(atoms);
      for (auto& p : pts) p = sampling::point(s, cfg);
      return DiscreteMeasure::uniform(pts);
    };
    const auto f = draw(), g = draw(), h = draw();
    const double fh = optimal_cost(f, h, params).value;
    const double den = optimal_cost(f, g, params).value + optimal_cost(g, h, params).value;
    ++r.samples;
    if (den > 0.0) worst_ratio = std::max(worst_ratio, fh / den);
    detail::Tally(r).check(fh - est.max_ratio * den, fh + den, [] { return std::vector<NamedValue>{}; });
  }
  r.constants["measure_ratio_max"] = worst_ratio;
  return r;
}

}  // namespace landau::verify
