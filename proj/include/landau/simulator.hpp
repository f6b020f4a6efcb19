#pragma once

// N-particle approximations of the Landau dynamics.
//
//   meanfield:       V_i += dt bbar_i + sqrt(dt) sqrt(abar_i) xi_i
//   pairwise noise:  V_i += dt bbar_i + sqrt(dt/N) sum_j sigma(V_i - V_j) xi_ij
//   coupled:         the pairwise scheme applied to (V, Vt) with the same xi_ij
//
// where bbar_i = (1/N) sum_j b(V_i - V_j) and abar_i = (1/N) sum_j a(V_i - V_j).
// Noise is keyed by (seed, step, i[, j]) so results do not depend on threading.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "landau/kernel.hpp"
#include "landau/linalg.hpp"
#include "landau/moments.hpp"
#include "landau/numeric.hpp"
#include "landau/rng.hpp"
#include "landau/transport.hpp"

namespace landau {

struct ParticleEnsemble {
  std::vector<Vec3> velocities;
  Gamma gamma{1.0};
  double time{0.0};
  std::uint64_t seed{0};
  std::uint64_t step_index{0};

  std::size_t size() const { return velocities.size(); }
  void validate() const {
    if (velocities.size() < 2) throw std::invalid_argument("ensemble needs at least 2 particles");
    for (const auto& v : velocities)
      if (!is_finite(v)) throw std::invalid_argument("ensemble has a non-finite velocity");
  }
};

/// N index-aligned pairs (V_i, Vt_i).
struct CoupledEnsemble {
  std::vector<Vec3> first;
  std::vector<Vec3> second;
  Gamma gamma{1.0};
  double time{0.0};
  std::uint64_t seed{0};
  std::uint64_t step_index{0};

  std::size_t size() const { return first.size(); }
  void validate() const {
    if (first.size() < 2 || first.size() != second.size())
      throw std::invalid_argument("coupled ensemble needs two marginals of equal size >= 2");
    for (std::size_t i = 0; i < first.size(); ++i)
      if (!is_finite(first[i]) || !is_finite(second[i]))
        throw std::invalid_argument("coupled ensemble has a non-finite velocity");
  }
};

enum class Scheme { kMeanfield, kPairwiseNoise };

struct SchemeConfig {
  double dt{1e-3};
  std::optional<double> truncation_k;
  Scheme scheme{Scheme::kPairwiseNoise};
  std::size_t steps{1};
  /// Pin momentum and energy after each step by an affine rescaling. A variance
  /// reduction heuristic; the particle system itself conserves only in law.
  bool conserve{false};
  unsigned threads{1};

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    if (truncation_k && !(*truncation_k > 0.0)) throw std::invalid_argument("truncation k must be positive");
    if (threads == 0) throw std::invalid_argument("threads must be >= 1");
  }
};

/// Raised when a step produces non-finite velocities.
class NumericalAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-step bookkeeping. For both schemes E[m2 after - m2 before | state] =
/// dt^2 * mean_drift_sq exactly, since 2 V.bbar + tr abar sums to zero.
struct StepStats {
  double mean_drift_sq{0.0};  // (1/N) sum_i |bbar_i|^2
  double max_speed{0.0};
};

namespace detail {

/// Structure-of-arrays copy of a velocity set.
struct Soa {
  std::vector<double> x, y, z;
  explicit Soa(const std::vector<Vec3>& v) : x(v.size()), y(v.size()), z(v.size()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      x[i] = v[i].x;
      y[i] = v[i].y;
      z[i] = v[i].z;
    }
  }
  std::size_t size() const { return x.size(); }
};

/// Calls f with a functor r2 -> r^e (0 at r = 0). The common exponents get
/// sqrt-only functors, chosen outside the hot loops so that those vectorize.
template <class F>
decltype(auto) with_radial_power(double e, F&& f) {
  if (e == 1.0) return f([](double r2) { return std::sqrt(r2); });
  if (e == 0.5) return f([](double r2) { return std::sqrt(std::sqrt(r2)); });
  if (e == 0.25) return f([](double r2) { return std::sqrt(std::sqrt(std::sqrt(r2))); });
  return f([e](double r2) { return r2 > 0.0 ? std::exp(0.5 * e * std::log(r2)) : 0.0; });
}

inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t, std::size_t, unsigned)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    fn(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t b = std::min(n, t * chunk), e = std::min(n, b + chunk);
    pool.emplace_back(fn, b, e, t);
  }
  for (auto& th : pool) th.join();
}

/// Sums over j of g_j x_j (for the drift) and of g_j (|x|^2 I - x x^T) (for a),
/// g_j = (|x_j| ^ k)^gamma, x_j = V_i - V_j.
struct MeanfieldSums {
  double bx{0}, by{0}, bz{0};
  double s0{0}, axx{0}, axy{0}, axz{0}, ayy{0}, ayz{0}, azz{0};
};

template <class Pow>
MeanfieldSums meanfield_sums_with(const Soa& s, double xi, double yi, double zi, double k2, Pow pw) {
  const std::size_t n = s.size();
  const double* X = s.x.data();
  const double* Y = s.y.data();
  const double* Z = s.z.data();
  double bx = 0, by = 0, bz = 0, s0 = 0, axx = 0, axy = 0, axz = 0, ayy = 0, ayz = 0, azz = 0;
#pragma omp simd reduction(+ : bx, by, bz, s0, axx, axy, axz, ayy, ayz, azz)
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = xi - X[j], dy = yi - Y[j], dz = zi - Z[j];
    const double r2 = dx * dx + dy * dy + dz * dz;
    const double g = pw(std::min(r2, k2));
    bx += g * dx;
    by += g * dy;
    bz += g * dz;
    s0 += g * r2;
    axx += g * dx * dx;
    axy += g * dx * dy;
    axz += g * dx * dz;
    ayy += g * dy * dy;
    ayz += g * dy * dz;
    azz += g * dz * dz;
  }
  MeanfieldSums m;
  m.bx = bx, m.by = by, m.bz = bz, m.s0 = s0;
  m.axx = axx, m.axy = axy, m.axz = axz, m.ayy = ayy, m.ayz = ayz, m.azz = azz;
  return m;
}

inline MeanfieldSums meanfield_sums(const Soa& s, double xi, double yi, double zi, double gamma, double k2) {
  return with_radial_power(gamma, [&](auto pw) { return meanfield_sums_with(s, xi, yi, zi, k2, pw); });
}

inline double truncation_sq(const std::optional<double>& k) {
  return k ? (*k) * (*k) : std::numeric_limits<double>::infinity();
}

/// Standard normals xi_ij, j = 0..n-1, for particle i at one step. Ziggurat
/// sampling over a per-pair Philox engine: far fewer transcendental calls than
/// Box-Muller, which dominates the cost of this scheme otherwise.
inline void fill_pair_normals(std::uint64_t seed, std::uint64_t step, std::size_t i, std::size_t n, double* nx, double* ny,
                              double* nz) {
  const rng::Key key = rng::key_from_seed(seed);
  boost::random::normal_distribution<double> normal;
  for (std::size_t j = 0; j < n; ++j) {
    rng::BlockEngine eng(
        key, rng::make_counter(rng::Purpose::kPairNoise, step, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)));
    nx[j] = normal(eng);
    ny[j] = normal(eng);
    nz[j] = normal(eng);
  }
}

/// Drift and pair-noise sums for particle i of one system:
///   sum_j b_k(x_j) and sum_j sigma_k(x_j) xi_j.
struct PairSums {
  double bx{0}, by{0}, bz{0};
  double nx{0}, ny{0}, nz{0};
};

template <class PowG, class PowHalf>
PairSums pair_noise_sums_with(const Soa& s, std::size_t i, double k2, const double* NX, const double* NY, const double* NZ,
                              PowG pg, PowHalf ph) {
  const std::size_t n = s.size();
  const double* X = s.x.data();
  const double* Y = s.y.data();
  const double* Z = s.z.data();
  const double xi = X[i], yi = Y[i], zi = Z[i];
  double bx = 0, by = 0, bz = 0, sx = 0, sy = 0, sz = 0;
#pragma omp simd reduction(+ : bx, by, bz, sx, sy, sz)
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = xi - X[j], dy = yi - Y[j], dz = zi - Z[j];
    const double r2 = dx * dx + dy * dy + dz * dz;
    const double rk2 = std::min(r2, k2);
    const double g = pg(rk2);
    // sigma_k(x) xi = (|x| ^ k)^{gamma/2} / |x| * (|x|^2 xi - (x . xi) x)
    const double c = r2 > 0.0 ? ph(rk2) / std::sqrt(r2) : 0.0;
    const double xd = dx * NX[j] + dy * NY[j] + dz * NZ[j];
    bx += g * dx;
    by += g * dy;
    bz += g * dz;
    sx += c * (r2 * NX[j] - xd * dx);
    sy += c * (r2 * NY[j] - xd * dy);
    sz += c * (r2 * NZ[j] - xd * dz);
  }
  return {bx, by, bz, sx, sy, sz};
}

inline PairSums pair_noise_sums(const Soa& s, std::size_t i, double gamma, double k2, const double* NX, const double* NY,
                                const double* NZ) {
  return with_radial_power(gamma, [&](auto pg) {
    return with_radial_power(0.5 * gamma, [&](auto ph) { return pair_noise_sums_with(s, i, k2, NX, NY, NZ, pg, ph); });
  });
}

inline bool all_finite(const std::vector<Vec3>& v) {
  return std::all_of(v.begin(), v.end(), [](const Vec3& x) { return is_finite(x); });
}

inline Vec3 mean_velocity(const std::vector<Vec3>& v) {
  std::vector<double> x(v.size()), y(v.size()), z(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) x[i] = v[i].x, y[i] = v[i].y, z[i] = v[i].z;
  const double n = static_cast<double>(v.size());
  return {tree_sum(x) / n, tree_sum(y) / n, tree_sum(z) / n};
}

/// Mean square deviation from the mean velocity.
inline double thermal_energy(const std::vector<Vec3>& v, const Vec3& mean) {
  std::vector<double> t(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) t[i] = norm2(v[i] - mean);
  return tree_sum(t) / static_cast<double>(v.size());
}

/// Affine map restoring the mean and thermal energy of `before`.
inline void restore_invariants(const std::vector<Vec3>& before, std::vector<Vec3>& after) {
  const Vec3 u0 = mean_velocity(before);
  const double t0 = thermal_energy(before, u0);
  const Vec3 u = mean_velocity(after);
  const double t = thermal_energy(after, u);
  const double s = t > 0.0 ? std::sqrt(t0 / t) : 1.0;
  for (auto& v : after) v = u0 + s * (v - u);
}

inline void check_finite_or_abort(const std::vector<Vec3>& v, std::uint64_t step) {
  if (!all_finite(v))
    throw NumericalAbort("non-finite velocity at step " + std::to_string(step) +
                         "; set a truncation k or reduce dt");
}

/// Advance several velocity systems of equal size by one pairwise-noise step
/// with identical pair noise. Each system sees only its own coefficients.
inline void step_shared_noise(std::vector<std::vector<Vec3>*>& systems, double gamma, std::uint64_t seed,
                              std::uint64_t step, const SchemeConfig& cfg, std::vector<StepStats>* stats) {
  const std::size_t n = systems.front()->size();
  for (auto* s : systems)
    if (s->size() != n) throw std::invalid_argument("shared-noise systems must have equal size");
  const double k2 = truncation_sq(cfg.truncation_k);
  std::vector<Soa> soa;
  for (auto* s : systems) soa.emplace_back(*s);
  std::vector<std::vector<Vec3>> next(systems.size(), std::vector<Vec3>(n));
  std::vector<std::vector<double>> drift_sq(systems.size(), std::vector<double>(n));
  const double inv_n = 1.0 / static_cast<double>(n);
  const double noise_scale = std::sqrt(cfg.dt * inv_n);

  parallel_for(n, cfg.threads, [&](std::size_t b, std::size_t e, unsigned) {
    std::vector<double> nx(n), ny(n), nz(n);
    for (std::size_t i = b; i < e; ++i) {
      fill_pair_normals(seed, step, i, n, nx.data(), ny.data(), nz.data());
      for (std::size_t s = 0; s < systems.size(); ++s) {
        const auto ps = pair_noise_sums(soa[s], i, gamma, k2, nx.data(), ny.data(), nz.data());
        const Vec3 drift = (-2.0 * inv_n) * Vec3{ps.bx, ps.by, ps.bz};
        next[s][i] = (*systems[s])[i] + cfg.dt * drift + noise_scale * Vec3{ps.nx, ps.ny, ps.nz};
        drift_sq[s][i] = norm2(drift);
      }
    }
  });
  for (const auto& v : next) check_finite_or_abort(v, step);  // all or nothing
  for (std::size_t s = 0; s < systems.size(); ++s) {
    if (cfg.conserve) restore_invariants(*systems[s], next[s]);
    if (stats) {
      StepStats st;
      st.mean_drift_sq = tree_sum(drift_sq[s]) * inv_n;
      for (const auto& v : next[s]) st.max_speed = std::max(st.max_speed, norm(v));
      stats->push_back(st);
    }
    *systems[s] = std::move(next[s]);
  }
}

}  // namespace detail

/// Drift and diffusion of particle i: ((1/N) sum_j b(V_i - V_j), sqrt((1/N) sum_j a(V_i - V_j))).
struct MeanfieldCoefficients {
  Vec3 drift;
  Mat3 diffusion;
  Mat3 a_average;
};

inline MeanfieldCoefficients meanfield_coefficients(std::size_t i, const ParticleEnsemble& e,
                                                    std::optional<double> truncation_k = std::nullopt) {
  if (i >= e.size()) throw std::out_of_range("meanfield_coefficients: particle index out of range");
  const detail::Soa s(e.velocities);
  const auto m = detail::meanfield_sums(s, s.x[i], s.y[i], s.z[i], e.gamma.value(), detail::truncation_sq(truncation_k));
  const double inv_n = 1.0 / static_cast<double>(e.size());
  MeanfieldCoefficients out;
  out.drift = (-2.0 * inv_n) * Vec3{m.bx, m.by, m.bz};
  Mat3 a = m.s0 * Mat3::identity();
  a -= Mat3{{m.axx, m.axy, m.axz, m.axy, m.ayy, m.ayz, m.axz, m.ayz, m.azz}};
  out.a_average = inv_n * a;
  out.diffusion = psd_sqrt(out.a_average);
  return out;
}

/// One Euler-Maruyama step with a single Brownian increment per particle and
/// the matrix square root of the averaged diffusion.
inline ParticleEnsemble step_meanfield(const ParticleEnsemble& e, const SchemeConfig& cfg, StepStats* stats = nullptr) {
  cfg.validate();
  e.validate();
  const std::size_t n = e.size();
  const detail::Soa s(e.velocities);
  const double k2 = detail::truncation_sq(cfg.truncation_k);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double sdt = std::sqrt(cfg.dt);
  ParticleEnsemble out = e;
  std::vector<double> drift_sq(n);
  std::vector<char> bad(n, 0);
  detail::parallel_for(n, cfg.threads, [&](std::size_t b, std::size_t end, unsigned) {
    for (std::size_t i = b; i < end; ++i) {
      const auto m = detail::meanfield_sums(s, s.x[i], s.y[i], s.z[i], e.gamma.value(), k2);
      const Vec3 drift = (-2.0 * inv_n) * Vec3{m.bx, m.by, m.bz};
      Mat3 a = m.s0 * Mat3::identity();
      a -= Mat3{{m.axx, m.axy, m.axz, m.axy, m.ayy, m.ayz, m.axz, m.ayz, m.azz}};
      a *= inv_n;
      if (!is_finite(a) || !is_finite(drift)) {
        bad[i] = 1;
        continue;
      }
      const Mat3 root = psd_sqrt(a);
      const Vec3 xi = rng::normal3(e.seed, rng::Purpose::kParticleNoise, e.step_index, static_cast<std::uint32_t>(i), 0);
      out.velocities[i] = e.velocities[i] + cfg.dt * drift + sdt * (root * xi);
      drift_sq[i] = norm2(drift);
    }
  });
  if (std::any_of(bad.begin(), bad.end(), [](char c) { return c != 0; }))
    throw NumericalAbort("non-finite coefficients at step " + std::to_string(e.step_index) +
                         "; set a truncation k or reduce dt");
  detail::check_finite_or_abort(out.velocities, e.step_index);
  if (cfg.conserve) detail::restore_invariants(e.velocities, out.velocities);
  if (stats) {
    stats->mean_drift_sq = tree_sum(drift_sq) * inv_n;
    stats->max_speed = 0.0;
    for (const auto& v : out.velocities) stats->max_speed = std::max(stats->max_speed, norm(v));
  }
  out.time += cfg.dt;
  ++out.step_index;
  return out;
}

/// One step with independent noise per ordered pair (i, j).
inline ParticleEnsemble step_pairwise_noise(const ParticleEnsemble& e, const SchemeConfig& cfg, StepStats* stats = nullptr) {
  cfg.validate();
  e.validate();
  ParticleEnsemble out = e;
  std::vector<std::vector<Vec3>*> systems{&out.velocities};
  std::vector<StepStats> st;
  detail::step_shared_noise(systems, e.gamma.value(), e.seed, e.step_index, cfg, stats ? &st : nullptr);
  if (stats) *stats = st.front();
  out.time += cfg.dt;
  ++out.step_index;
  return out;
}

/// Coupled step: both marginals use the same pair noise xi_ij.
inline CoupledEnsemble step_coupled(const CoupledEnsemble& ce, const SchemeConfig& cfg) {
  cfg.validate();
  ce.validate();
  CoupledEnsemble out = ce;
  std::vector<std::vector<Vec3>*> systems{&out.first, &out.second};
  detail::step_shared_noise(systems, ce.gamma.value(), ce.seed, ce.step_index, cfg, nullptr);
  out.time += cfg.dt;
  ++out.step_index;
  return out;
}

inline ParticleEnsemble step(const ParticleEnsemble& e, const SchemeConfig& cfg, StepStats* stats = nullptr) {
  return cfg.scheme == Scheme::kMeanfield ? step_meanfield(e, cfg, stats) : step_pairwise_noise(e, cfg, stats);
}

/// Multiple of the initial maximum speed used when truncation is switched on
/// after a non-finite step.
inline constexpr double kAutoTruncationFactor = 100.0;

struct RunReport {
  bool truncation_auto_enabled{false};
  std::optional<double> truncation_k;
  std::vector<StepStats> stats;
};

inline double max_speed(const std::vector<Vec3>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, norm(x));
  return m;
}

/// Runs cfg.steps steps, calling `observe` after each one. If a step is
/// non-finite and no truncation was configured, truncation is enabled at
/// k = 100 * (max initial speed) and the step is retried; a second failure
/// rethrows with the last valid state left in `e`.
inline RunReport run(ParticleEnsemble& e, SchemeConfig cfg,
                     const std::function<void(const ParticleEnsemble&)>& observe = {}) {
  RunReport rep;
  rep.truncation_k = cfg.truncation_k;
  const double k_auto = kAutoTruncationFactor * std::max(max_speed(e.velocities), 1e-300);
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    StepStats st;
    try {
      e = step(e, cfg, &st);
    } catch (const NumericalAbort&) {
      if (cfg.truncation_k) throw;
      cfg.truncation_k = k_auto;
      rep.truncation_auto_enabled = true;
      rep.truncation_k = k_auto;
      e = step(e, cfg, &st);
    }
    rep.stats.push_back(st);
    if (observe) observe(e);
  }
  return rep;
}

inline RunReport run(CoupledEnsemble& ce, SchemeConfig cfg, const std::function<void(const CoupledEnsemble&)>& observe = {}) {
  RunReport rep;
  rep.truncation_k = cfg.truncation_k;
  const double k_auto =
      kAutoTruncationFactor * std::max({max_speed(ce.first), max_speed(ce.second), 1e-300});
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    try {
      ce = step_coupled(ce, cfg);
    } catch (const NumericalAbort&) {
      if (cfg.truncation_k) throw;
      cfg.truncation_k = k_auto;
      rep.truncation_auto_enabled = true;
      rep.truncation_k = k_auto;
      ce = step_coupled(ce, cfg);
    }
    if (observe) observe(ce);
  }
  return rep;
}

/// Several systems driven by identical pair noise, e.g. one base ensemble and
/// perturbations of it at several scales. Pairing the base with any one of the
/// others gives exactly the coupled scheme.
struct SharedNoiseBundle {
  std::vector<std::vector<Vec3>> systems;
  Gamma gamma{1.0};
  double time{0.0};
  std::uint64_t seed{0};
  std::uint64_t step_index{0};

  void step(const SchemeConfig& cfg) {
    cfg.validate();
    std::vector<std::vector<Vec3>*> ptrs;
    for (auto& s : systems) ptrs.push_back(&s);
    detail::step_shared_noise(ptrs, gamma.value(), seed, step_index, cfg, nullptr);
    time += cfg.dt;
    ++step_index;
  }
};

// ---------------------------------------------------------------------------
// Diagnostics

struct Diagnostics {
  double time{0.0};
  Vec3 momentum;  // mean velocity
  double m2{0.0};
  std::vector<double> orders;
  std::vector<double> moments;
  double gaussian_a{0.0};
  GaussianMoment gaussian;
};

struct DiagnosticsConfig {
  std::vector<double> orders{4.0};
  double gaussian_a{0.1};
};

inline Diagnostics diagnostics(const std::vector<Vec3>& v, double time, const DiagnosticsConfig& cfg = {}) {
  Diagnostics d;
  d.time = time;
  d.momentum = detail::mean_velocity(v);
  d.m2 = empirical_moment(v, 2.0);
  d.orders = cfg.orders;
  for (double p : cfg.orders) d.moments.push_back(empirical_moment(v, p));
  d.gaussian_a = cfg.gaussian_a;
  if (cfg.gaussian_a > 0.0) d.gaussian = gaussian_moment(DiscreteMeasure::uniform(v), cfg.gaussian_a);
  return d;
}

inline Diagnostics diagnostics(const ParticleEnsemble& e, const DiagnosticsConfig& cfg = {}) {
  return diagnostics(e.velocities, e.time, cfg);
}

/// (1/N) sum_i c_{p,eps}(V_i, Vt_i): the cost of the index-aligned coupling.
inline double aligned_cost(const std::vector<Vec3>& a, const std::vector<Vec3>& b, const CostParams& params) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("aligned_cost: size mismatch");
  std::vector<double> c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = cost(a[i], b[i], params);
  return tree_sum(c) / static_cast<double>(a.size());
}

struct CoupledDiagnostics {
  Diagnostics first;
  Diagnostics second;
  double aligned_cost{0.0};
  std::optional<double> optimal_cost;  // only when N is within the solver cap
};

inline CoupledDiagnostics diagnostics(const CoupledEnsemble& ce, const CostParams& params, const DiagnosticsConfig& cfg = {},
                                      std::size_t assignment_cap = 0) {
  CoupledDiagnostics d;
  d.first = diagnostics(ce.first, ce.time, cfg);
  d.second = diagnostics(ce.second, ce.time, cfg);
  d.aligned_cost = aligned_cost(ce.first, ce.second, params);
  if (ce.size() <= assignment_cap) {
    TransportOptions opts;
    opts.max_atoms = assignment_cap;
    d.optimal_cost =
        optimal_cost(DiscreteMeasure::uniform(ce.first), DiscreteMeasure::uniform(ce.second), params, opts).value;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Initial conditions. Each draws from its own counter stream per particle.

namespace initial {

inline rng::Stream particle_stream(std::uint64_t seed, std::size_t i) {
  return rng::Stream(seed, rng::Purpose::kInitialCondition, i);
}

/// Independent normals with per-axis temperatures (variances).
inline std::vector<Vec3> gaussian(std::size_t n, const Vec3& temperature, std::uint64_t seed) {
  std::vector<Vec3> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto s = particle_stream(seed, i);
    const Vec3 g = s.normal3();
    v[i] = {std::sqrt(temperature.x) * g.x, std::sqrt(temperature.y) * g.y, std::sqrt(temperature.z) * g.z};
  }
  return v;
}

inline std::vector<Vec3> gaussian(std::size_t n, double temperature, std::uint64_t seed) {
  return gaussian(n, Vec3{temperature, temperature, temperature}, seed);
}

/// Uniform in the ball of given radius.
inline std::vector<Vec3> ball(std::size_t n, double radius, std::uint64_t seed) {
  std::vector<Vec3> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto s = particle_stream(seed, i);
    const Vec3 u = s.unit_vector();
    v[i] = (radius * std::cbrt(s.uniform())) * u;
  }
  return v;
}

/// Mixture of two atoms: a with probability w, b otherwise.
inline std::vector<Vec3> two_point(std::size_t n, const Vec3& a, const Vec3& b, double w, std::uint64_t seed) {
  std::vector<Vec3> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto s = particle_stream(seed, i);
    v[i] = s.uniform() < w ? a : b;
  }
  return v;
}

/// Normal law supported on the line through 0 with the given direction.
inline std::vector<Vec3> line(std::size_t n, const Vec3& direction, double scale, std::uint64_t seed) {
  const double r = norm(direction);
  if (!(r > 0.0)) throw std::invalid_argument("line: direction must be nonzero");
  std::vector<Vec3> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto s = particle_stream(seed, i);
    v[i] = (scale * s.normal() / r) * direction;
  }
  return v;
}

/// Gamma(shape, 1) by Marsaglia and Tsang, shape > 0.
inline double gamma_variate(rng::Stream& s, double shape) {
  if (shape < 1.0) return gamma_variate(s, shape + 1.0) * std::pow(s.uniform(), 1.0 / shape);
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, w;
    do {
      x = s.normal();
      w = 1.0 + c * x;
    } while (w <= 0.0);
    w = w * w * w;
    const double u = s.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * w + d * std::log(w)) return d * w;
  }
}

/// Multivariate Student t with nu > 2 degrees of freedom: E|v|^q < inf iff q < nu.
/// Raw draws, not normalized.
inline std::vector<Vec3> student_t(std::size_t n, double nu, std::uint64_t seed) {
  if (!(nu > 2.0)) throw std::invalid_argument("student_t: nu must exceed 2 for finite energy");
  std::vector<Vec3> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto s = particle_stream(seed, i);
    const Vec3 z = s.normal3();
    const double chi2 = 2.0 * gamma_variate(s, 0.5 * nu);
    v[i] = std::sqrt(nu / chi2) * z;
  }
  return v;
}

/// Shift to zero mean and scale to m_2 = target.
inline std::vector<Vec3> center_and_scale(std::vector<Vec3> v, double target_m2) {
  const Vec3 u = detail::mean_velocity(v);
  for (auto& x : v) x -= u;
  const double m2 = empirical_moment(v, 2.0);
  if (!(m2 > 0.0)) throw std::invalid_argument("center_and_scale: degenerate ensemble");
  const double s = std::sqrt(target_m2 / m2);
  for (auto& x : v) x *= s;
  return v;
}

/// Unit directions u_i for perturbations V_i + s u_i.
inline std::vector<Vec3> perturbation_directions(std::size_t n, std::uint64_t seed) {
  std::vector<Vec3> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = rng::Stream(seed, rng::Purpose::kPerturbation, i).unit_vector();
  return u;
}

inline std::vector<Vec3> perturb(const std::vector<Vec3>& base, const std::vector<Vec3>& directions, double scale) {
  std::vector<Vec3> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = base[i] + scale * directions[i];
  return out;
}

/// Scale s such that the index-aligned cost between base and base + s u equals
/// target (the cost is increasing in s). Bisection to relative 1e-12.
inline double scale_for_aligned_cost(const std::vector<Vec3>& base, const std::vector<Vec3>& directions,
                                     const CostParams& params, double target) {
  if (!(target > 0.0)) throw std::invalid_argument("scale_for_aligned_cost: target must be positive");
  double lo = 0.0, hi = 1.0;
  while (aligned_cost(base, perturb(base, directions, hi), params) < target) {
    hi *= 2.0;
    if (hi > 1e12) throw std::runtime_error("scale_for_aligned_cost: target unreachable");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (aligned_cost(base, perturb(base, directions, mid), params) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace initial
}  // namespace landau
