#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace chainrec {

using Point = std::complex<double>;

// Closed real interval with outward rounding on every arithmetic result.
// An interval whose computation overflowed widens to the whole line.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static constexpr Interval point(double v) { return {v, v}; }
  static Interval entire() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {-inf, inf};
  }

  bool contains(double v) const { return lo <= v && v <= hi; }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  double width() const { return hi - lo; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

namespace detail {

inline double round_down(double v) {
  return std::nextafter(v, -std::numeric_limits<double>::infinity());
}
inline double round_up(double v) {
  return std::nextafter(v, std::numeric_limits<double>::infinity());
}

inline Interval widen(double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi)) return Interval::entire();
  return {round_down(lo), round_up(hi)};
}

}  // namespace detail

inline Interval operator+(const Interval& a, const Interval& b) {
  return detail::widen(a.lo + b.lo, a.hi + b.hi);
}

inline Interval operator-(const Interval& a, const Interval& b) {
  return detail::widen(a.lo - b.hi, a.hi - b.lo);
}

inline Interval operator*(const Interval& a, const Interval& b) {
  if (!a.bounded() || !b.bounded()) return Interval::entire();
  const double p1 = a.lo * b.lo;
  const double p2 = a.lo * b.hi;
  const double p3 = a.hi * b.lo;
  const double p4 = a.hi * b.hi;
  return detail::widen(std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4}));
}

inline Interval scale(double c, const Interval& a) {
  if (!a.bounded()) return Interval::entire();
  const double p = c * a.lo;
  const double q = c * a.hi;
  return detail::widen(std::min(p, q), std::max(p, q));
}

// Tighter than a * a when the interval straddles zero.
inline Interval square(const Interval& a) {
  if (!a.bounded()) return {0.0, std::numeric_limits<double>::infinity()};
  const double l = a.lo * a.lo;
  const double h = a.hi * a.hi;
  if (a.lo >= 0.0) return detail::widen(l, h);
  if (a.hi <= 0.0) return detail::widen(h, l);
  return {0.0, detail::round_up(std::max(l, h))};
}

// Axis-aligned rectangle in the complex plane: [re_lo, re_hi] x [im_lo, im_hi].
struct IntervalBox2 {
  Interval re;
  Interval im;

  static IntervalBox2 from_bounds(double re_lo, double re_hi, double im_lo, double im_hi) {
    return {{re_lo, re_hi}, {im_lo, im_hi}};
  }
  static IntervalBox2 point(Point p) {
    return {Interval::point(p.real()), Interval::point(p.imag())};
  }

  bool contains(Point p) const { return re.contains(p.real()) && im.contains(p.imag()); }
  bool bounded() const { return re.bounded() && im.bounded(); }
  bool valid() const { return re.lo <= re.hi && im.lo <= im.hi; }

  // Closed intersection test.
  bool intersects(const IntervalBox2& o) const {
    return re.lo <= o.re.hi && o.re.lo <= re.hi && im.lo <= o.im.hi && o.im.lo <= im.hi;
  }

  // Squared Euclidean distance between the two closed rectangles.
  double distance_squared(const IntervalBox2& o) const {
    const double dx = std::max({0.0, o.re.lo - re.hi, re.lo - o.re.hi});
    const double dy = std::max({0.0, o.im.lo - im.hi, im.lo - o.im.hi});
    return dx * dx + dy * dy;
  }

  friend bool operator==(const IntervalBox2&, const IntervalBox2&) = default;
};

// Complex interval arithmetic on rectangles.
inline IntervalBox2 operator+(const IntervalBox2& a, const IntervalBox2& b) {
  return {a.re + b.re, a.im + b.im};
}
inline IntervalBox2 operator-(const IntervalBox2& a, const IntervalBox2& b) {
  return {a.re - b.re, a.im - b.im};
}
inline IntervalBox2 operator*(const IntervalBox2& a, const IntervalBox2& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline IntervalBox2 scale(double c, const IntervalBox2& a) {
  return {scale(c, a.re), scale(c, a.im)};
}
inline IntervalBox2 square(const IntervalBox2& a) {
  return {square(a.re) - square(a.im), scale(2.0, a.re * a.im)};
}

}  // namespace chainrec
