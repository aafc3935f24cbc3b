#pragma once

// Closed real intervals with outward (directed) rounding.
//
// Directed rounding is emulated with error-free transformations instead of
// switching the FPU rounding mode: TwoSum for addition and FMA residuals for
// multiplication and division. An exact operation returns a degenerate
// interval, so affine cylinder data built from dyadic ratios stays exact.
// Transcendentals (log, exp, pow) are widened by one ulp on each side.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace stp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double next_down(double x) { return std::nextafter(x, -kInf); }
inline double next_up(double x) { return std::nextafter(x, kInf); }

namespace rounding {

// Sign of the exact error of a + b relative to the rounded sum.
inline double two_sum_err(double a, double b, double s) {
  const double bb = s - a;
  return (a - (s - bb)) + (b - bb);
}

inline double add_down(double a, double b) {
  const double s = a + b;
  if (!std::isfinite(s)) return s;
  return two_sum_err(a, b, s) < 0 ? next_down(s) : s;
}
inline double add_up(double a, double b) {
  const double s = a + b;
  if (!std::isfinite(s)) return s;
  return two_sum_err(a, b, s) > 0 ? next_up(s) : s;
}
inline double sub_down(double a, double b) { return add_down(a, -b); }
inline double sub_up(double a, double b) { return add_up(a, -b); }

inline double mul_down(double a, double b) {
  const double p = a * b;
  if (!std::isfinite(p) || p == 0.0) {
    // Underflow to zero: the true product may be a tiny nonzero value.
    if (p == 0.0 && a != 0.0 && b != 0.0)
      return (std::signbit(a) != std::signbit(b)) ? -std::numeric_limits<double>::denorm_min() : 0.0;
    return p;
  }
  return std::fma(a, b, -p) < 0 ? next_down(p) : p;
}
inline double mul_up(double a, double b) {
  const double p = a * b;
  if (!std::isfinite(p) || p == 0.0) {
    if (p == 0.0 && a != 0.0 && b != 0.0)
      return (std::signbit(a) != std::signbit(b)) ? 0.0 : std::numeric_limits<double>::denorm_min();
    return p;
  }
  return std::fma(a, b, -p) > 0 ? next_up(p) : p;
}

// a / b for b > 0.
inline double div_down(double a, double b) {
  const double q = a / b;
  if (!std::isfinite(q)) return q;
  return std::fma(-q, b, a) < 0 ? next_down(q) : q;
}
inline double div_up(double a, double b) {
  const double q = a / b;
  if (!std::isfinite(q)) return q;
  return std::fma(-q, b, a) > 0 ? next_up(q) : q;
}

inline double log_down(double x) {
  if (x == 1.0) return 0.0;
  const double v = std::log(x);
  return std::isfinite(v) ? next_down(v) : v;
}
inline double log_up(double x) {
  if (x == 1.0) return 0.0;
  const double v = std::log(x);
  return std::isfinite(v) ? next_up(v) : v;
}
inline double exp_down(double x) {
  if (x == 0.0) return 1.0;
  const double v = std::exp(x);
  return (v > 0.0 && std::isfinite(v)) ? next_down(v) : v;
}
inline double exp_up(double x) {
  if (x == 0.0) return 1.0;
  const double v = std::exp(x);
  if (v == 0.0) return std::numeric_limits<double>::denorm_min();
  return std::isfinite(v) ? next_up(v) : v;
}

}  // namespace rounding

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  constexpr Interval() = default;
  constexpr Interval(double l, double h) : lo(l), hi(h) {}
  static constexpr Interval point(double x) { return {x, x}; }
  static constexpr Interval unit() { return {0.0, 1.0}; }

  [[nodiscard]] double width() const { return hi - lo; }
  [[nodiscard]] double mid() const { return lo + 0.5 * (hi - lo); }
  [[nodiscard]] bool contains(double x) const { return lo <= x && x <= hi; }
  [[nodiscard]] bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  [[nodiscard]] bool valid() const { return lo <= hi; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

inline Interval operator+(const Interval& a, const Interval& b) {
  return {rounding::add_down(a.lo, b.lo), rounding::add_up(a.hi, b.hi)};
}
inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }
inline Interval operator-(const Interval& a, const Interval& b) { return a + (-b); }

// Scaling by a nonnegative constant.
inline Interval scale(double c, const Interval& a) {
  if (c == 0.0) return {0.0, 0.0};
  return {rounding::mul_down(c, a.lo), rounding::mul_up(c, a.hi)};
}

// Product of two intervals with nonnegative endpoints.
inline Interval mul_nonneg(const Interval& a, const Interval& b) {
  return {rounding::mul_down(a.lo, b.lo), rounding::mul_up(a.hi, b.hi)};
}

inline Interval hull(const Interval& a, const Interval& b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

inline Interval clamp_unit(const Interval& a) {
  return {std::clamp(a.lo, 0.0, 1.0), std::clamp(a.hi, 0.0, 1.0)};
}

inline Interval log(const Interval& a) { return {rounding::log_down(a.lo), rounding::log_up(a.hi)}; }
inline Interval exp(const Interval& a) { return {rounding::exp_down(a.lo), rounding::exp_up(a.hi)}; }

inline std::ostream& operator<<(std::ostream& os, const Interval& a) {
  return os << '[' << a.lo << ", " << a.hi << ']';
}

}  // namespace stp
