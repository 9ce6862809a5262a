#pragma once

#include <optional>
#include <string>

#include "core/log2_scalar.hpp"

namespace blowup {

/// One level of the double-exponential tower phi_n = 2^(2^n).
/// log2_value = 2^n always fits; float_value is present only while the
/// tower itself fits in a double (n <= 9).
struct PhiSequence {
  int index = 0;
  long long log2_value = 1;
  std::optional<double> float_value;

  static PhiSequence at(int n);
  PhiSequence squared() const { return at(index + 1); }
};

namespace phi {

/// Largest n handled by the exact integer backend.
inline constexpr int kExactMax = 24;
/// Largest n whose collar slope a_n fits in a double.
inline constexpr int kFloatCoeffMax = 8;
/// Largest n whose collar endpoints phi_n +- 1/2 are distinct doubles.
inline constexpr int kFloatCollarMax = 5;

double log2_phi(int n);            // 2^n as a double
LogScalar phi_log(int n);          // phi_n
LogScalar phi_pow_log(int n, double k);  // phi_n^k

/// Collar slope a_n = x^4 - 2 x^2 + x with x = phi_{n-1}, n >= 1.
LogScalar collar_slope_log(int n);
/// Collar offset b_n = (-2 x^6 + 5 x^4 - 2 x^3 - x) / 2, always an integer.
LogScalar collar_offset_log(int n);
/// Plateau value phi_{n+1} - phi_n of the constant piece after collar n.
LogScalar plateau_value_log(int n);
/// Ramp value at the collar midpoint, (phi_{n+1} - phi_{n-1}) / 2.
LogScalar collar_midpoint_value_log(int n);
/// Collar entry value phi_n - phi_{n-1} (the plateau before collar n).
LogScalar collar_entry_value_log(int n);

/// Correctly rounded doubles of the exact integers; valid for n <= kFloatCoeffMax.
double a_n(int n);
double b_n(int n);
double phi_n(int n);  // n <= 9

/// Exact check that collar n glues continuously to both neighbouring
/// plateaus: a_n (phi_n -+ 1/2) + b_n equals phi_n - phi_{n-1} resp.
/// phi_{n+1} - phi_n as rationals. Residuals (doubled to clear the half)
/// are reported in decimal if out is non-null.
bool collar_continuity_exact(int n, std::string* residuals = nullptr);

/// Decimal digits of the exact a_n / b_n, for reports.
std::string a_n_decimal(int n);
std::string b_n_decimal(int n);

}  // namespace phi
}  // namespace blowup
