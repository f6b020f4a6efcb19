#pragma once

// Counter-based random streams. Every random draw in the library is a pure
// function of (seed, counter), so results do not depend on evaluation order or
// thread count. The bijection is Philox4x32-10 (Salmon et al., SC'11).

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "landau/linalg.hpp"

namespace landau::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

namespace detail {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

constexpr void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace detail

constexpr Counter philox4x32(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0 = 0, lo0 = 0, hi1 = 0, lo1 = 0;
    detail::mulhilo(detail::kMul0, ctr[0], hi0, lo0);
    detail::mulhilo(detail::kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += detail::kWeyl0;
    key[1] += detail::kWeyl1;
  }
  return ctr;
}

/// Stream purposes; part of the counter so distinct uses never collide.
enum class Purpose : std::uint32_t {
  kParticleNoise = 1,
  kPairNoise = 2,
  kInitialCondition = 3,
  kPerturbation = 4,
  kSampler = 5,
  kGeneric = 6,
};

/// Uniform in (0, 1), never exactly 0 or 1.
constexpr double to_open_unit(std::uint32_t u) { return (static_cast<double>(u) + 0.5) * 0x1p-32; }

/// Four independent standard normals from one Philox block (two Box-Muller pairs).
inline std::array<double, 4> normals4(const Counter& ctr, Key key) {
  const Counter r = philox4x32(ctr, key);
  std::array<double, 4> out{};
  for (int k = 0; k < 2; ++k) {
    const double rad = std::sqrt(-2.0 * std::log(to_open_unit(r[2 * k])));
    const double ang = 2.0 * std::numbers::pi * to_open_unit(r[2 * k + 1]);
    out[2 * k] = rad * std::cos(ang);
    out[2 * k + 1] = rad * std::sin(ang);
  }
  return out;
}

inline Key key_from_seed(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// Counter layout: (a, b, step bits 0..31, purpose << 24 | step bits 32..47).
/// Bits 16..23 of the last word are left for BlockEngine.
inline Counter make_counter(Purpose purpose, std::uint64_t step, std::uint32_t a, std::uint32_t b) {
  return {a, b, static_cast<std::uint32_t>(step),
          (static_cast<std::uint32_t>(purpose) << 24) | static_cast<std::uint32_t>((step >> 32) & 0xFFFFu)};
}

/// Standard 3D normal keyed by (seed, purpose, step, a, b).
inline Vec3 normal3(std::uint64_t seed, Purpose purpose, std::uint64_t step, std::uint32_t a, std::uint32_t b) {
  const auto n = normals4(make_counter(purpose, step, a, b), key_from_seed(seed));
  return {n[0], n[1], n[2]};
}

/// Uniform random bit generator over up to 256 Philox blocks of one counter,
/// with the block index in bits 16..23 of the last word. Intended for short
/// draws such as a few normals per particle pair; wraps after 1024 outputs.
class BlockEngine {
 public:
  using result_type = std::uint32_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xFFFFFFFFu; }

  BlockEngine(const Key& key, const Counter& base) : key_(key), base_(base) {}

  result_type operator()() {
    if (pos_ == 4) {
      Counter c = base_;
      c[3] ^= static_cast<std::uint32_t>(block_ & 0xFFu) << 16;
      block_ = (block_ + 1) & 0xFFu;
      buf_ = philox4x32(c, key_);
      pos_ = 0;
    }
    return buf_[pos_++];
  }

 private:
  Key key_;
  Counter base_;
  Counter buf_{};
  std::uint32_t block_{0};
  int pos_{4};
};

/// Sequential generator on top of the counter scheme, for sampling loops that
/// want a conventional "next()" interface. Each (seed, purpose, stream) triple is
/// an independent sequence.
class Stream {
 public:
  Stream(std::uint64_t seed, Purpose purpose, std::uint64_t stream)
      : key_(key_from_seed(seed)), purpose_(purpose), stream_(stream) {}

  double uniform() {
    refill_if_needed();
    return to_open_unit(block_[pos_++]);
  }

  double normal() {
    if (has_spare_normal_) {
      has_spare_normal_ = false;
      return spare_normal_;
    }
    const double rad = std::sqrt(-2.0 * std::log(uniform()));
    const double ang = 2.0 * std::numbers::pi * uniform();
    spare_normal_ = rad * std::sin(ang);
    has_spare_normal_ = true;
    return rad * std::cos(ang);
  }

  Vec3 normal3() {
    const double a = normal();
    const double b = normal();
    return {a, b, normal()};
  }

  /// Uniform direction on the unit sphere.
  Vec3 unit_vector() {
    for (;;) {
      const Vec3 g = normal3();
      const double r = norm(g);
      if (r > 1e-12) return (1.0 / r) * g;
    }
  }

  std::uint64_t next_u64() {
    refill_if_needed();
    const std::uint64_t hi = block_[pos_++];
    refill_if_needed();
    return (hi << 32) | block_[pos_++];
  }

 private:
  void refill_if_needed() {
    if (pos_ < 4) return;
    block_ = philox4x32(make_counter(purpose_, stream_, static_cast<std::uint32_t>(block_index_),
                                     static_cast<std::uint32_t>(block_index_ >> 32)),
                        key_);
    ++block_index_;
    pos_ = 0;
  }

  Key key_;
  Purpose purpose_;
  std::uint64_t stream_;
  std::uint64_t block_index_{0};
  Counter block_{};
  int pos_{4};
  bool has_spare_normal_{false};
  double spare_normal_{0.0};
};

}  // namespace landau::rng
