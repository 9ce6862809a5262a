#include "core/log2_scalar.hpp"

#include "core/errors.hpp"

namespace blowup {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.6931471805599453094172321214581766;
}  // namespace

double log2_one_plus_exp2(double d) {
  if (d < -1080.0) return 0.0;  // 2^d underflows even subnormals
  return std::log1p(std::exp2(d)) / kLn2;
}

double log2_one_minus_exp2(double d) {
  require(d < 0.0, Errc::domain, "log2_one_minus_exp2: d must be negative");
  if (d < -1080.0) return 0.0;
  // For d near 0 use expm1 in base e: 1 - 2^d = -expm1(d ln 2).
  return std::log1p(-std::exp2(d)) / kLn2;
}

LogScalar LogScalar::from_double(double x) {
  require(!std::isnan(x), Errc::domain, "LogScalar: NaN input");
  if (x == 0.0) return zero();
  return {x > 0.0 ? 1 : -1, std::log2(std::fabs(x))};
}

LogScalar LogScalar::from_log2(double l2, int sign) {
  require(sign == 1 || sign == -1, Errc::invalid_argument, "LogScalar: sign must be +-1");
  require(!std::isnan(l2), Errc::domain, "LogScalar: NaN exponent");
  return {sign, l2};
}

double LogScalar::to_double() const {
  if (sign == 0) return 0.0;
  return static_cast<double>(sign) * std::exp2(l2);
}

LogScalar LogScalar::operator*(const LogScalar& o) const {
  if (sign == 0 || o.sign == 0) return zero();
  return {sign * o.sign, l2 + o.l2};
}

LogScalar LogScalar::operator/(const LogScalar& o) const {
  require(o.sign != 0, Errc::domain, "LogScalar: division by zero");
  if (sign == 0) return zero();
  return {sign * o.sign, l2 - o.l2};
}

LogScalar LogScalar::operator+(const LogScalar& o) const {
  if (sign == 0) return o;
  if (o.sign == 0) return *this;
  const LogScalar* hi = this;
  const LogScalar* lo = &o;
  if (lo->l2 > hi->l2) std::swap(hi, lo);
  double d = lo->l2 - hi->l2;  // <= 0
  if (hi->sign == lo->sign) return {hi->sign, hi->l2 + log2_one_plus_exp2(d)};
  if (d == 0.0) return zero();
  return {hi->sign, hi->l2 + log2_one_minus_exp2(d)};
}

LogScalar LogScalar::pow_abs(double e) const {
  require(sign != 0, Errc::domain, "LogScalar: pow of zero");
  return {1, l2 * e};
}

int LogScalar::compare(const LogScalar& o) const {
  if (sign != o.sign) return sign < o.sign ? -1 : 1;
  if (sign == 0) return 0;
  if (l2 == o.l2) return 0;
  bool mag_less = l2 < o.l2;
  if (sign > 0) return mag_less ? -1 : 1;
  return mag_less ? 1 : -1;
}

}  // namespace blowup
