#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace graze {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, const Vec2& a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(const Vec2& a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }
inline Vec2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }
inline double angle_of(const Vec2& v) { return std::atan2(v.y, v.x); }
inline Vec2 normalized(const Vec2& v) {
  const double n = norm(v);
  return {v.x / n, v.y / n};
}
/// Counter-clockwise quarter turn.
constexpr Vec2 perp(const Vec2& v) { return {-v.y, v.x}; }

/// Maps an angle into [0, 2π).
inline double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

/// Maps an angle into (-π, π].
inline double wrap_signed(double a) {
  double r = wrap_angle(a);
  if (r > kPi) r -= kTwoPi;
  return r;
}

/// Shortest signed difference a - b on the circle.
inline double angle_diff(double a, double b) { return wrap_signed(a - b); }

/// Row-major 2x2 matrix.
struct Mat2 {
  std::array<double, 4> m{};

  static constexpr Mat2 identity() { return Mat2{{1.0, 0.0, 0.0, 1.0}}; }

  constexpr double& operator()(int r, int c) { return m[static_cast<std::size_t>(2 * r + c)]; }
  constexpr double operator()(int r, int c) const { return m[static_cast<std::size_t>(2 * r + c)]; }

  constexpr double det() const { return m[0] * m[3] - m[1] * m[2]; }
  constexpr Mat2 transpose() const { return Mat2{{m[0], m[2], m[1], m[3]}}; }
  constexpr Mat2 inverse() const {
    const double d = det();
    return Mat2{{m[3] / d, -m[1] / d, -m[2] / d, m[0] / d}};
  }
  /// Largest absolute entry.
  double max_abs() const {
    double r = 0.0;
    for (double v : m) r = std::max(r, std::abs(v));
    return r;
  }

  friend constexpr Mat2 operator*(const Mat2& a, const Mat2& b) {
    return Mat2{{a.m[0] * b.m[0] + a.m[1] * b.m[2], a.m[0] * b.m[1] + a.m[1] * b.m[3],
                 a.m[2] * b.m[0] + a.m[3] * b.m[2], a.m[2] * b.m[1] + a.m[3] * b.m[3]}};
  }
  friend constexpr Vec2 operator*(const Mat2& a, const Vec2& v) {
    return {a.m[0] * v.x + a.m[1] * v.y, a.m[2] * v.x + a.m[3] * v.y};
  }
  friend constexpr Mat2 operator*(double s, const Mat2& a) {
    return Mat2{{s * a.m[0], s * a.m[1], s * a.m[2], s * a.m[3]}};
  }
  friend constexpr Mat2 operator+(const Mat2& a, const Mat2& b) {
    return Mat2{{a.m[0] + b.m[0], a.m[1] + b.m[1], a.m[2] + b.m[2], a.m[3] + b.m[3]}};
  }
  friend constexpr Mat2 operator-(const Mat2& a, const Mat2& b) {
    return Mat2{{a.m[0] - b.m[0], a.m[1] - b.m[1], a.m[2] - b.m[2], a.m[3] - b.m[3]}};
  }
};

/// max |a - b| / max(max|b|, floor); entrywise-max relative error of a 2x2 matrix.
inline double relative_error(const Mat2& a, const Mat2& b, double floor = 1e-300) {
  return (a - b).max_abs() / std::max(b.max_abs(), floor);
}

}  // namespace graze
