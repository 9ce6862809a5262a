#include "core/phi.hpp"

#include <gmpxx.h>

#include <cstdlib>

#include "core/errors.hpp"

namespace blowup {

PhiSequence PhiSequence::at(int n) {
  require(n >= 0 && n <= 62, Errc::invalid_argument, "PhiSequence: index out of range");
  PhiSequence p;
  p.index = n;
  p.log2_value = 1LL << n;
  if (p.log2_value <= 1023) p.float_value = std::exp2(static_cast<double>(p.log2_value));
  return p;
}

namespace phi {

namespace {

mpz_class phi_exact(int n) {
  require(n >= 0 && n <= kExactMax, Errc::invalid_argument, "phi_exact: index out of range");
  mpz_class v;
  mpz_ui_pow_ui(v.get_mpz_t(), 2, 1ULL << n);
  return v;
}

// a_n and 2*b_n as exact integers, in terms of x = phi_{n-1}.
mpz_class a_exact(int n) {
  require(n >= 1, Errc::invalid_argument, "a_exact: n >= 1 required");
  mpz_class x = phi_exact(n - 1);
  return x * x * x * x - 2 * x * x + x;
}

mpz_class b2_exact(int n) {
  require(n >= 1, Errc::invalid_argument, "b2_exact: n >= 1 required");
  mpz_class x = phi_exact(n - 1);
  mpz_class x3 = x * x * x;
  return -2 * x3 * x3 + 5 * x3 * x - 2 * x3 - x;
}

}  // namespace

double log2_phi(int n) {
  require(n >= 0 && n <= 62, Errc::invalid_argument, "log2_phi: index out of range");
  return static_cast<double>(1LL << n);
}

LogScalar phi_log(int n) { return LogScalar::from_log2(log2_phi(n)); }

LogScalar phi_pow_log(int n, double k) { return LogScalar::from_log2(k * log2_phi(n)); }

LogScalar collar_slope_log(int n) {
  require(n >= 1, Errc::invalid_argument, "collar_slope_log: n >= 1 required");
  LogScalar x = phi_log(n - 1);
  return x.pow_abs(4.0) - LogScalar::from_double(2.0) * x * x + x;
}

LogScalar collar_offset_log(int n) {
  require(n >= 1, Errc::invalid_argument, "collar_offset_log: n >= 1 required");
  LogScalar x = phi_log(n - 1);
  LogScalar x3 = x * x * x;
  LogScalar two = LogScalar::from_double(2.0);
  LogScalar five = LogScalar::from_double(5.0);
  LogScalar num = -two * x3 * x3 + five * x3 * x - two * x3 - x;
  return num / two;
}

LogScalar plateau_value_log(int n) {
  require(n >= 0, Errc::invalid_argument, "plateau_value_log: n >= 0 required");
  return phi_log(n + 1) - phi_log(n);
}

LogScalar collar_midpoint_value_log(int n) {
  require(n >= 1, Errc::invalid_argument, "collar_midpoint_value_log: n >= 1 required");
  return (phi_log(n + 1) - phi_log(n - 1)) / LogScalar::from_double(2.0);
}

LogScalar collar_entry_value_log(int n) {
  require(n >= 1, Errc::invalid_argument, "collar_entry_value_log: n >= 1 required");
  return phi_log(n) - phi_log(n - 1);
}

namespace {

// mpz_class::get_d truncates toward zero; the decimal round trip rounds to
// nearest, matching what double arithmetic on the same quantity produces.
double to_double_nearest(const mpz_class& z) {
  return std::strtod(z.get_str().c_str(), nullptr);
}

}  // namespace

double a_n(int n) {
  require(n <= kFloatCoeffMax, Errc::range, "a_n: exceeds double range, use collar_slope_log");
  return to_double_nearest(a_exact(n));
}

double b_n(int n) {
  require(n <= kFloatCoeffMax, Errc::range, "b_n: exceeds double range, use collar_offset_log");
  mpz_class b2 = b2_exact(n);
  require(mpz_even_p(b2.get_mpz_t()) != 0, Errc::internal, "b_n: parity invariant broken");
  return to_double_nearest(b2 / 2);
}

double phi_n(int n) {
  PhiSequence p = PhiSequence::at(n);
  require(p.float_value.has_value(), Errc::range, "phi_n: exceeds double range");
  return *p.float_value;
}

bool collar_continuity_exact(int n, std::string* residuals) {
  // The high-side residual reads phi_{n+1}, so the last checkable level is
  // kExactMax - 1.
  require(n >= 1 && n + 1 <= kExactMax, Errc::invalid_argument,
          "collar_continuity_exact: index out of range");
  mpz_class a = a_exact(n);
  mpz_class b2 = b2_exact(n);
  mpz_class pn = phi_exact(n);
  mpz_class pn1 = phi_exact(n + 1);
  mpz_class pprev = phi_exact(n - 1);
  // Everything doubled: 2 h_n(phi_n -+ 1/2) - 2 (target value).
  mpz_class res_lo = a * (2 * pn - 1) + b2 - 2 * (pn - pprev);
  mpz_class res_hi = a * (2 * pn + 1) + b2 - 2 * (pn1 - pn);
  if (residuals) *residuals = res_lo.get_str() + "," + res_hi.get_str();
  return res_lo == 0 && res_hi == 0;
}

std::string a_n_decimal(int n) { return a_exact(n).get_str(); }

std::string b_n_decimal(int n) {
  mpz_class b2 = b2_exact(n);
  mpz_class b = b2 / 2;
  return b.get_str();
}

}  // namespace phi
}  // namespace blowup
