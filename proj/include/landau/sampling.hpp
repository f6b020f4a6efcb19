#pragma once

// Random point and quadruple samplers used by the inequality suites. Violations
// of fitted constants concentrate at extremes, so besides plain Gaussian points
// the mixture draws heavy-tailed radii and nearly coincident pairs.

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "landau/linalg.hpp"
#include "landau/rng.hpp"

namespace landau {

struct SamplerConfig {
  double normal_weight{1.0 / 3.0};
  double heavy_weight{1.0 / 3.0};
  double near_weight{1.0 / 3.0};
  double normal_scale{1.0};
  double pareto_index{2.6};  // P(|v| > r) = r^{-index} for r >= 1
  double near_offset{1e-6};
  bool coincident_only{false};  // degenerate sampler: v = vt, v* = vt*
};

/// Four velocities (v, v*, vt, vt*) in the argument order of the coupling generator.
struct Quadruple {
  Vec3 v;
  Vec3 v_star;
  Vec3 vt;
  Vec3 vt_star;
};

namespace sampling {

inline Vec3 heavy_tail_point(rng::Stream& s, double index) {
  const double r = std::pow(s.uniform(), -1.0 / index);
  return r * s.unit_vector();
}

inline Vec3 normal_point(rng::Stream& s, double scale) { return scale * s.normal3(); }

enum class Mode { kNormal, kHeavy, kNear };

inline Mode pick_mode(rng::Stream& s, const SamplerConfig& cfg) {
  const double total = cfg.normal_weight + cfg.heavy_weight + cfg.near_weight;
  if (!(total > 0.0)) throw std::invalid_argument("sampler weights must have positive sum");
  const double u = s.uniform() * total;
  if (u < cfg.normal_weight) return Mode::kNormal;
  if (u < cfg.normal_weight + cfg.heavy_weight) return Mode::kHeavy;
  return Mode::kNear;
}

/// Either a Gaussian or a heavy-tailed point, each with probability 1/2.
inline Vec3 mixed_point(rng::Stream& s, const SamplerConfig& cfg) {
  return s.uniform() < 0.5 ? normal_point(s, cfg.normal_scale) : heavy_tail_point(s, cfg.pareto_index);
}

/// Draw number `index` of a deterministic quadruple sequence.
inline Quadruple quadruple(std::uint64_t seed, std::uint64_t index, const SamplerConfig& cfg) {
  rng::Stream s(seed, rng::Purpose::kSampler, index);
  Quadruple q;
  if (cfg.coincident_only) {
    q.v = mixed_point(s, cfg);
    q.v_star = mixed_point(s, cfg);
    q.vt = q.v;
    q.vt_star = q.v_star;
    return q;
  }
  switch (pick_mode(s, cfg)) {
    case Mode::kNormal:
      q.v = normal_point(s, cfg.normal_scale);
      q.v_star = normal_point(s, cfg.normal_scale);
      q.vt = normal_point(s, cfg.normal_scale);
      q.vt_star = normal_point(s, cfg.normal_scale);
      break;
    case Mode::kHeavy:
      q.v = heavy_tail_point(s, cfg.pareto_index);
      q.v_star = heavy_tail_point(s, cfg.pareto_index);
      q.vt = heavy_tail_point(s, cfg.pareto_index);
      q.vt_star = heavy_tail_point(s, cfg.pareto_index);
      break;
    case Mode::kNear: {
      q.v = mixed_point(s, cfg);
      q.v_star = mixed_point(s, cfg);
      q.vt = q.v + cfg.near_offset * s.unit_vector();
      // Background pair is either coincident, nearly coincident, or independent.
      const double u = s.uniform();
      if (u < 1.0 / 3.0)
        q.vt_star = q.v_star;
      else if (u < 2.0 / 3.0)
        q.vt_star = q.v_star + cfg.near_offset * s.unit_vector();
      else
        q.vt_star = mixed_point(s, cfg);
      break;
    }
  }
  return q;
}

/// A single point from the same mixture (near mode degenerates to mixed).
inline Vec3 point(rng::Stream& s, const SamplerConfig& cfg) {
  switch (pick_mode(s, cfg)) {
    case Mode::kNormal:
      return normal_point(s, cfg.normal_scale);
    case Mode::kHeavy:
      return heavy_tail_point(s, cfg.pareto_index);
    case Mode::kNear:
      break;
  }
  return mixed_point(s, cfg);
}

}  // namespace sampling
}  // namespace landau
