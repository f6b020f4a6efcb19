#pragma once

// Weighted transport costs
//   c_{p,eps}(v, w) = (1 + |v|^p + |w|^p) phi_eps(|v - w|^2),  phi_eps(r) = r / (1 + eps r)
// and exact discrete optimal transport between finitely supported measures.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "landau/kernel.hpp"
#include "landau/linalg.hpp"
#include "landau/numeric.hpp"
#include "landau/rng.hpp"
#include "landau/sampling.hpp"

namespace landau {

struct CostParams {
  double p{2.0};
  double eps{1.0};

  void validate() const {
    if (!(p >= 2.0)) throw std::invalid_argument("cost: p must be >= 2, got " + std::to_string(p));
    if (!(eps >= 0.0 && eps <= 1.0))
      throw std::invalid_argument("cost: eps must lie in [0, 1], got " + std::to_string(eps));
  }
};

inline double phi_eps(double r, double eps) {
  if (r < 0.0) throw std::invalid_argument("phi_eps: r must be nonnegative");
  return r / (1.0 + eps * r);
}

/// phi_eps'(r) = (1 + eps r)^{-2}
inline double phi_eps_d1(double r, double eps) {
  const double d = 1.0 + eps * r;
  return 1.0 / (d * d);
}

/// phi_eps''(r) = -2 eps (1 + eps r)^{-3}
inline double phi_eps_d2(double r, double eps) {
  const double d = 1.0 + eps * r;
  return -2.0 * eps / (d * d * d);
}

/// 1 + |v|^p + |w|^p
inline double moment_weight(const Vec3& v, const Vec3& w, double p) {
  return 1.0 + pow_nonneg(norm(v), p) + pow_nonneg(norm(w), p);
}

inline double cost(const Vec3& v, const Vec3& w, const CostParams& params) {
  return moment_weight(v, w, params.p) * phi_eps(norm2(v - w), params.eps);
}

/// Finitely supported probability measure.
struct DiscreteMeasure {
  std::vector<Vec3> points;
  std::vector<double> weights;

  static DiscreteMeasure uniform(std::vector<Vec3> pts) {
    DiscreteMeasure m;
    const double w = pts.empty() ? 0.0 : 1.0 / static_cast<double>(pts.size());
    m.weights.assign(pts.size(), w);
    m.points = std::move(pts);
    return m;
  }

  std::size_t size() const { return points.size(); }

  bool is_uniform() const {
    if (weights.empty()) return true;
    return std::all_of(weights.begin(), weights.end(), [&](double w) { return w == weights.front(); });
  }

  void validate() const {
    if (points.empty()) throw std::invalid_argument("measure has no atoms");
    if (points.size() != weights.size()) throw std::invalid_argument("measure: points/weights size mismatch");
    for (const auto& p : points)
      if (!is_finite(p)) throw std::invalid_argument("measure: non-finite atom");
    for (double w : weights)
      if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("measure: negative or non-finite weight");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("measure: weights sum to " + std::to_string(total) + ", expected 1");
  }
};

/// Thrown when an instance exceeds the configured solver size.
class SolverCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlanEntry {
  std::size_t i{0};
  std::size_t j{0};
  double mass{0.0};
};

struct TransportResult {
  double value{0.0};
  std::vector<PlanEntry> plan;
  /// Bound on |value - exact optimum| caused by integer rescaling of weights
  /// (zero for the assignment route).
  double rounding_error_bound{0.0};
};

struct TransportOptions {
  std::size_t max_atoms{5000};
  double weight_scale{1e9};
};

namespace detail {

inline std::vector<double> cost_matrix(const DiscreteMeasure& f, const DiscreteMeasure& g,
                                       const std::function<double(const Vec3&, const Vec3&)>& c) {
  std::vector<double> m(f.size() * g.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) m[i * g.size() + j] = c(f.points[i], g.points[j]);
  return m;
}

/// Dense Hungarian algorithm with potentials, O(n^3). Returns row -> column, and
/// the dual potentials (u, v) with u_i + v_j <= c_ij.
struct AssignmentSolution {
  std::vector<std::size_t> row_to_col;
  std::vector<double> u;
  std::vector<double> v;
};

inline AssignmentSolution hungarian(const std::vector<double>& c, std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      const double* row = &c[(i0 - 1) * n];
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  AssignmentSolution sol;
  sol.row_to_col.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) sol.row_to_col[p[j] - 1] = j - 1;
  sol.u.assign(u.begin() + 1, u.end());
  sol.v.assign(v.begin() + 1, v.end());
  return sol;
}

/// Among optimal assignments (those using only tight edges of the dual
/// solution), pick the lexicographically smallest row -> column map.
inline void lexicographic_tiebreak(const std::vector<double>& c, std::size_t n, AssignmentSolution& sol) {
  double scale = 1.0;
  for (double x : c) scale = std::max(scale, std::abs(x));
  const double tol = 1e-12 * scale;
  std::vector<std::vector<std::size_t>> tight(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (c[i * n + j] - sol.u[i] - sol.v[j] <= tol) tight[i].push_back(j);

  auto& match = sol.row_to_col;
  std::vector<std::ptrdiff_t> col_owner(n, -1);
  for (std::size_t i = 0; i < n; ++i) col_owner[match[i]] = static_cast<std::ptrdiff_t>(i);

  std::vector<char> fixed(n, 0), visited(n, 0);
  std::function<bool(std::size_t)> augment = [&](std::size_t r) -> bool {
    for (std::size_t col : tight[r]) {
      if (visited[col]) continue;
      visited[col] = 1;
      const std::ptrdiff_t owner = col_owner[col];
      if (owner < 0 || (!fixed[static_cast<std::size_t>(owner)] && augment(static_cast<std::size_t>(owner)))) {
        match[r] = col;
        col_owner[col] = static_cast<std::ptrdiff_t>(r);
        return true;
      }
    }
    return false;
  };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : tight[i]) {
      if (j == match[i]) break;
      const std::ptrdiff_t other = col_owner[j];
      if (other >= 0 && fixed[static_cast<std::size_t>(other)]) continue;
      // Tentatively give column j to row i and try to rematch the displaced row.
      const auto saved_match = match;
      const auto saved_owner = col_owner;
      const std::size_t old_col = match[i];
      col_owner[old_col] = -1;
      match[i] = j;
      col_owner[j] = static_cast<std::ptrdiff_t>(i);
      fixed[i] = 1;
      std::fill(visited.begin(), visited.end(), 0);
      visited[j] = 1;
      if (other >= 0 && augment(static_cast<std::size_t>(other))) break;
      fixed[i] = 0;
      match = saved_match;
      col_owner = saved_owner;
    }
    fixed[i] = 1;
  }
}

/// Successive-shortest-path min-cost flow for the transportation problem with
/// integer supplies/demands and real arc costs.
inline std::vector<std::int64_t> transportation_flow(const std::vector<double>& c, const std::vector<std::int64_t>& supply,
                                                     const std::vector<std::int64_t>& demand) {
  const std::size_t n = supply.size();
  const std::size_t m = demand.size();
  const std::size_t nodes = n + m + 2;
  const std::size_t src = n + m;
  const std::size_t snk = n + m + 1;
  struct Arc {
    std::size_t to;
    std::size_t rev;
    std::int64_t cap;
    double cost;
  };
  std::vector<std::vector<Arc>> g(nodes);
  auto add_arc = [&](std::size_t a, std::size_t b, std::int64_t cap, double cst) {
    g[a].push_back({b, g[b].size(), cap, cst});
    g[b].push_back({a, g[a].size() - 1, 0, -cst});
  };
  const std::int64_t big = std::numeric_limits<std::int64_t>::max() / 4;
  for (std::size_t i = 0; i < n; ++i) add_arc(src, i, supply[i], 0.0);
  std::vector<std::vector<std::size_t>> arc_index(n, std::vector<std::size_t>(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      arc_index[i][j] = g[i].size();
      add_arc(i, n + j, big, c[i * m + j]);
    }
  for (std::size_t j = 0; j < m; ++j) add_arc(n + j, snk, demand[j], 0.0);

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> pot(nodes, 0.0), dist(nodes);
  std::vector<std::size_t> prev_node(nodes), prev_arc(nodes);
  std::int64_t remaining = std::accumulate(supply.begin(), supply.end(), std::int64_t{0});
  while (remaining > 0) {
    std::fill(dist.begin(), dist.end(), inf);
    dist[src] = 0.0;
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.push({0.0, src});
    while (!pq.empty()) {
      const auto [d, a] = pq.top();
      pq.pop();
      if (d > dist[a]) continue;
      for (std::size_t k = 0; k < g[a].size(); ++k) {
        const Arc& e = g[a][k];
        if (e.cap <= 0) continue;
        const double reduced = std::max(0.0, e.cost + pot[a] - pot[e.to]);
        if (dist[a] + reduced < dist[e.to]) {
          dist[e.to] = dist[a] + reduced;
          prev_node[e.to] = a;
          prev_arc[e.to] = k;
          pq.push({dist[e.to], e.to});
        }
      }
    }
    if (dist[snk] == inf) throw std::runtime_error("transportation_flow: infeasible instance");
    for (std::size_t a = 0; a < nodes; ++a)
      if (dist[a] < inf) pot[a] += dist[a];
    std::int64_t push = remaining;
    for (std::size_t a = snk; a != src; a = prev_node[a]) push = std::min(push, g[prev_node[a]][prev_arc[a]].cap);
    for (std::size_t a = snk; a != src; a = prev_node[a]) {
      Arc& e = g[prev_node[a]][prev_arc[a]];
      e.cap -= push;
      g[a][e.rev].cap += push;
    }
    remaining -= push;
  }
  std::vector<std::int64_t> flow(n * m, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const Arc& e = g[i][arc_index[i][j]];
      flow[i * m + j] = g[e.to][e.rev].cap;
    }
  return flow;
}

/// Integer masses summing exactly to `total`, by largest-remainder rounding.
inline std::vector<std::int64_t> integer_masses(const std::vector<double>& w, std::int64_t total) {
  std::vector<std::int64_t> out(w.size());
  std::vector<std::pair<double, std::size_t>> rem(w.size());
  std::int64_t used = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double scaled = w[k] * static_cast<double>(total);
    out[k] = static_cast<std::int64_t>(std::floor(scaled));
    used += out[k];
    rem[k] = {scaled - std::floor(scaled), k};
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; used < total && k < rem.size(); ++k, ++used) ++out[rem[k].second];
  for (std::size_t k = 0; used > total && k < rem.size(); ++k)
    if (out[rem[rem.size() - 1 - k].second] > 0) {
      --out[rem[rem.size() - 1 - k].second];
      --used;
    }
  return out;
}

}  // namespace detail

/// Exact optimal transport for an arbitrary ground cost. Equal-size uniform
/// measures go through the assignment solver; all others through min-cost flow
/// on integer-rescaled weights.
inline TransportResult solve_transport(const DiscreteMeasure& f, const DiscreteMeasure& g,
                                       const std::function<double(const Vec3&, const Vec3&)>& ground_cost,
                                       const TransportOptions& opts = {}) {
  f.validate();
  g.validate();
  if (f.size() > opts.max_atoms || g.size() > opts.max_atoms)
    throw SolverCapExceeded("transport instance has " + std::to_string(std::max(f.size(), g.size())) +
                            " atoms, cap is " + std::to_string(opts.max_atoms));
  const auto c = detail::cost_matrix(f, g, ground_cost);
  for (double x : c)
    if (!std::isfinite(x)) throw std::domain_error("transport: non-finite ground cost");

  TransportResult res;
  if (f.size() == g.size() && f.is_uniform() && g.is_uniform()) {
    const std::size_t n = f.size();
    auto sol = detail::hungarian(c, n);
    detail::lexicographic_tiebreak(c, n, sol);
    double total = 0.0;
    const double w = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      total += c[i * n + sol.row_to_col[i]];
      res.plan.push_back({i, sol.row_to_col[i], w});
    }
    res.value = total / static_cast<double>(n);
    return res;
  }

  const auto scale = static_cast<std::int64_t>(opts.weight_scale);
  const auto a = detail::integer_masses(f.weights, scale);
  const auto b = detail::integer_masses(g.weights, scale);
  const auto flow = detail::transportation_flow(c, a, b);
  double total = 0.0;
  double max_cost = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) {
      max_cost = std::max(max_cost, c[i * g.size() + j]);
      const std::int64_t fl = flow[i * g.size() + j];
      if (fl == 0) continue;
      const double mass = static_cast<double>(fl) / static_cast<double>(scale);
      res.plan.push_back({i, j, mass});
      total += mass * c[i * g.size() + j];
    }
  double disc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    disc += std::abs(f.weights[i] - static_cast<double>(a[i]) / static_cast<double>(scale));
  for (std::size_t j = 0; j < g.size(); ++j)
    disc += std::abs(g.weights[j] - static_cast<double>(b[j]) / static_cast<double>(scale));
  res.value = total;
  res.rounding_error_bound = max_cost * disc;
  return res;
}

/// T_{p,eps}(F, G) with an optimal plan.
inline TransportResult optimal_cost(const DiscreteMeasure& f, const DiscreteMeasure& g, const CostParams& params,
                                    const TransportOptions& opts = {}) {
  params.validate();
  auto res = solve_transport(f, g, [&](const Vec3& v, const Vec3& w) { return cost(v, w, params); }, opts);
  if (!std::isfinite(res.value)) throw std::domain_error("optimal_cost: non-finite transport cost");
  return res;
}

/// Permutation brute force over uniform measures of equal size n <= 8. Oracle
/// for the assignment route of optimal_cost.
inline double brute_force_cost(const DiscreteMeasure& f, const DiscreteMeasure& g, const CostParams& params) {
  f.validate();
  g.validate();
  if (f.size() != g.size() || !f.is_uniform() || !g.is_uniform())
    throw std::invalid_argument("brute_force_cost: needs uniform measures of equal size");
  const std::size_t n = f.size();
  if (n > 8) throw std::invalid_argument("brute_force_cost: n = " + std::to_string(n) + " exceeds 8");
  std::vector<double> c(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = cost(f.points[i], g.points[j], params);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += c[i * n + perm[i]];
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

/// Discrete Wasserstein distance of order p >= 1.
inline double wasserstein_p(const DiscreteMeasure& f, const DiscreteMeasure& g, double p,
                            const TransportOptions& opts = {}) {
  if (!(p >= 1.0)) throw std::invalid_argument("wasserstein_p: p must be >= 1");
  const auto res = solve_transport(f, g, [p](const Vec3& v, const Vec3& w) { return pow_nonneg(norm(v - w), p); }, opts);
  return std::pow(std::max(res.value, 0.0), 1.0 / p);
}

/// Marginal residuals of a plan: max_i |sum_j R_ij - f_i| and the same for columns.
inline double plan_marginal_error(const TransportResult& res, const DiscreteMeasure& f, const DiscreteMeasure& g) {
  std::vector<double> row(f.size(), 0.0), col(g.size(), 0.0);
  for (const auto& e : res.plan) {
    row[e.i] += e.mass;
    col[e.j] += e.mass;
  }
  double err = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(row[i] - f.weights[i]));
  for (std::size_t j = 0; j < g.size(); ++j) err = std::max(err, std::abs(col[j] - g.weights[j]));
  return err;
}

/// Ratio c(v, y) / (c(v, w) + c(w, y)); 0 when both sides vanish.
inline double rti_ratio(const Vec3& v, const Vec3& w, const Vec3& y, const CostParams& params) {
  const double num = cost(v, y, params);
  const double den = cost(v, w, params) + cost(w, y, params);
  if (den == 0.0) return 0.0;
  return num / den;
}

struct RtiEstimate {
  double max_ratio{0.0};
  Vec3 v, w, y;  // maximizing triple
  std::size_t samples{0};
};

/// Empirical lower bound on the best constant of the relaxed triangle inequality
/// c(v, y) <= C [c(v, w) + c(w, y)].
inline RtiEstimate rti_constant_estimate(const CostParams& params, std::size_t samples, std::uint64_t seed,
                                         const SamplerConfig& sampler = {}) {
  params.validate();
  RtiEstimate est;
  est.samples = samples;
  for (std::size_t k = 0; k < samples; ++k) {
    rng::Stream s(seed, rng::Purpose::kSampler, k);
    const Vec3 v = sampling::point(s, sampler);
    const Vec3 w = sampling::point(s, sampler);
    const Vec3 y = sampling::point(s, sampler);
    const double r = rti_ratio(v, w, y, params);
    if (!std::isfinite(r)) throw std::domain_error("rti_constant_estimate: non-finite ratio");
    if (r > est.max_ratio) {
      est.max_ratio = r;
      est.v = v;
      est.w = w;
      est.y = y;
    }
  }
  return est;
}

}  // namespace landau
