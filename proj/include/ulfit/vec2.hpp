#pragma once

#include <cmath>

namespace ulfit {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }
inline double norm2(const Vec2& a) { return dot(a, a); }

// counterclockwise rotation by 90 degrees
inline Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }

// 2x2 symmetric matrix stored as (xx, xy, yy); used for per-element diffusion
// coefficients.
struct SymMat2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  Vec2 apply(const Vec2& v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
};

inline SymMat2 identity_times(double c) { return {c, 0.0, c}; }

// c*I + f f^T
inline SymMat2 rank_one_plus(double c, const Vec2& f) {
  return {c + f.x * f.x, f.x * f.y, c + f.y * f.y};
}

}  // namespace ulfit
