#pragma once

#include <cmath>
#include <limits>

namespace blowup {

/// Signed scalar stored as sign plus log2 of the magnitude.
///
/// Exact doubles stop being able to hold the tower values 2^(2^n) around
/// n = 10; everything that must reason about larger indices (certificates,
/// tail sums, growth ratios) runs on this type instead. Addition and
/// subtraction go through log1p, so relative error stays near machine eps
/// as long as catastrophic cancellation is avoided by the caller.
struct LogScalar {
  int sign = 0;  // -1, 0, +1
  double l2 = -std::numeric_limits<double>::infinity();  // log2 |x|; -inf iff sign == 0

  static LogScalar zero() { return {}; }
  static LogScalar one() { return {1, 0.0}; }
  static LogScalar from_double(double x);
  /// 2^l2 with an explicit sign; l2 may exceed the double exponent range.
  static LogScalar from_log2(double l2, int sign = 1);

  bool is_zero() const { return sign == 0; }
  /// Saturates to +-inf outside the double range; 0 below it.
  double to_double() const;

  LogScalar operator-() const { return {-sign, l2}; }
  LogScalar abs() const { return {sign == 0 ? 0 : 1, l2}; }
  LogScalar operator*(const LogScalar& o) const;
  LogScalar operator/(const LogScalar& o) const;
  LogScalar operator+(const LogScalar& o) const;
  LogScalar operator-(const LogScalar& o) const { return *this + (-o); }
  /// |x|^e for x != 0; e need not be an integer.
  LogScalar pow_abs(double e) const;

  /// Three-way signed comparison: -1, 0, +1.
  int compare(const LogScalar& o) const;
  bool operator<(const LogScalar& o) const { return compare(o) < 0; }
  bool operator>(const LogScalar& o) const { return compare(o) > 0; }
};

/// log2(1 + 2^d) for d <= 0, accurate near d = 0 and for very negative d.
double log2_one_plus_exp2(double d);
/// log2(1 - 2^d) for d < 0.
double log2_one_minus_exp2(double d);

}  // namespace blowup
