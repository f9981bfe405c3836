#ifndef MALAB_GEOMETRY_HPP
#define MALAB_GEOMETRY_HPP

#include <algorithm>
#include <cmath>

namespace malab {

struct Vec2
{
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(const Vec2& o)
  {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
constexpr double norm2(const Vec2& a) { return dot(a, a); }
inline Vec2 normalized(const Vec2& a)
{
  const double n = norm(a);
  return n > 0.0 ? a / n : a;
}
/// Counter-clockwise rotation by 90 degrees.
constexpr Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }

/// Symmetric 2x2 matrix stored by its three independent entries.
struct Sym2
{
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  constexpr double det() const { return xx * yy - xy * xy; }
  constexpr double trace() const { return xx + yy; }
  double min_eig() const
  {
    const double m = 0.5 * (xx + yy);
    const double r = std::hypot(0.5 * (xx - yy), xy);
    return m - r;
  }
  double max_eig() const
  {
    const double m = 0.5 * (xx + yy);
    const double r = std::hypot(0.5 * (xx - yy), xy);
    return m + r;
  }
  /// Cofactor matrix; equals det * inverse when invertible.
  constexpr Sym2 cofactor() const { return {yy, -xy, xx}; }
  double frobenius() const { return std::sqrt(xx * xx + 2.0 * xy * xy + yy * yy); }
  double max_abs_entry() const { return std::max({std::abs(xx), std::abs(xy), std::abs(yy)}); }
  constexpr Vec2 apply(const Vec2& v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }

  constexpr Sym2 operator+(const Sym2& o) const { return {xx + o.xx, xy + o.xy, yy + o.yy}; }
  constexpr Sym2 operator-(const Sym2& o) const { return {xx - o.xx, xy - o.xy, yy - o.yy}; }
  constexpr Sym2 operator*(double s) const { return {xx * s, xy * s, yy * s}; }
  constexpr bool operator==(const Sym2&) const = default;
};

/// trace(A B) for symmetric A, B.
constexpr double trace_product(const Sym2& a, const Sym2& b)
{
  return a.xx * b.xx + 2.0 * a.xy * b.xy + a.yy * b.yy;
}

/// General 2x2 matrix, row-major.
struct Mat2
{
  double a = 1.0, b = 0.0;
  double c = 0.0, d = 1.0;

  static constexpr Mat2 identity() { return {}; }
  /// Columns are the images of e1 and e2.
  static constexpr Mat2 from_columns(const Vec2& c1, const Vec2& c2) { return {c1.x, c2.x, c1.y, c2.y}; }

  constexpr double det() const { return a * d - b * c; }
  constexpr Vec2 apply(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  constexpr Mat2 transpose() const { return {a, c, b, d}; }
  constexpr Mat2 inverse() const
  {
    const double dt = det();
    return {d / dt, -b / dt, -c / dt, a / dt};
  }
  constexpr Mat2 operator*(const Mat2& o) const
  {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  /// Spectral norm.
  double norm() const
  {
    const double s1 = a * a + b * b + c * c + d * d;
    const double dt = det();
    const double disc = std::sqrt(std::max(0.0, s1 * s1 - 4.0 * dt * dt));
    return std::sqrt(0.5 * (s1 + disc));
  }
};

/// M^T S M for symmetric S.
inline Sym2 congruence(const Mat2& m, const Sym2& s)
{
  const Vec2 c1{m.a, m.c};
  const Vec2 c2{m.b, m.d};
  return {dot(c1, s.apply(c1)), dot(c1, s.apply(c2)), dot(c2, s.apply(c2))};
}

struct Box
{
  Vec2 lo;
  Vec2 hi;
};

} // namespace malab

#endif
