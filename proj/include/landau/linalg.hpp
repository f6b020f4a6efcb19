#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace landau {

/// A velocity (or relative velocity) in R^3.
struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  constexpr double& operator[](std::size_t k) { return k == 0 ? x : (k == 1 ? y : z); }
  constexpr double operator[](std::size_t k) const { return k == 0 ? x : (k == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

inline bool is_finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

/// Dense 3x3 matrix, row-major.
struct Mat3 {
  std::array<double, 9> m{};

  constexpr double& operator()(std::size_t r, std::size_t c) { return m[3 * r + c]; }
  constexpr double operator()(std::size_t r, std::size_t c) const { return m[3 * r + c]; }

  static constexpr Mat3 identity() {
    Mat3 out;
    out(0, 0) = out(1, 1) = out(2, 2) = 1.0;
    return out;
  }
  static constexpr Mat3 diag(double a, double b, double c) {
    Mat3 out;
    out(0, 0) = a;
    out(1, 1) = b;
    out(2, 2) = c;
    return out;
  }
  /// a b^T
  static constexpr Mat3 outer(const Vec3& a, const Vec3& b) {
    Mat3 out;
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 3; ++c) out(r, c) = a[r] * b[c];
    return out;
  }

  constexpr Mat3& operator+=(const Mat3& o) {
    for (std::size_t k = 0; k < 9; ++k) m[k] += o.m[k];
    return *this;
  }
  constexpr Mat3& operator-=(const Mat3& o) {
    for (std::size_t k = 0; k < 9; ++k) m[k] -= o.m[k];
    return *this;
  }
  constexpr Mat3& operator*=(double s) {
    for (auto& e : m) e *= s;
    return *this;
  }

  friend constexpr Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
  friend constexpr Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
  friend constexpr Mat3 operator*(double s, Mat3 a) { return a *= s; }
  friend constexpr Mat3 operator*(Mat3 a, double s) { return a *= s; }

  friend constexpr Vec3 operator*(const Mat3& a, const Vec3& v) {
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
            a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
  }
  friend constexpr Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 out;
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 3; ++c) {
        double s = 0.0;
        for (std::size_t k = 0; k < 3; ++k) s += a(r, k) * b(k, c);
        out(r, c) = s;
      }
    return out;
  }
  friend constexpr bool operator==(const Mat3&, const Mat3&) = default;
};

constexpr Mat3 transpose(const Mat3& a) {
  Mat3 out;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) out(r, c) = a(c, r);
  return out;
}

constexpr double trace(const Mat3& a) { return a(0, 0) + a(1, 1) + a(2, 2); }

/// <<A, B>> = Tr(A B^T)
constexpr double frobenius_inner(const Mat3& a, const Mat3& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < 9; ++k) s += a.m[k] * b.m[k];
  return s;
}

constexpr double frobenius_norm2(const Mat3& a) { return frobenius_inner(a, a); }
inline double frobenius_norm(const Mat3& a) { return std::sqrt(frobenius_norm2(a)); }

inline bool is_finite(const Mat3& a) {
  for (double e : a.m)
    if (!std::isfinite(e)) return false;
  return true;
}

}  // namespace landau
