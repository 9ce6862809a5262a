#pragma once

#include <string>
#include <vector>

namespace blowup {

/// A named smooth function usable as a source piece. Registered entries
/// carry enough analytic side information (derivative, slope bounds,
/// reciprocal antiderivative, asymptotic degree) that the rest of the
/// library never has to differentiate or integrate 1/f blindly.
struct AnalyticFn {
  std::string name;
  double (*value)(double);
  double (*deriv)(double);
  /// sup |f'| over [lo, hi] intersected with the domain; +inf when unbounded.
  double (*slope_bound)(double lo, double hi);

  /// Antiderivative R of 1/f on (domain_pos, inf), where f > 0.
  bool has_recip_antideriv = false;
  double (*recip_antideriv)(double) = nullptr;
  /// lim_{s->inf} R(s); +inf means the reciprocal tail integral diverges.
  double recip_limit = 0.0;
  /// Inverse of the antiderivative where available: recip_antideriv_inv(R(s)) = s.
  double (*recip_antideriv_inv)(double) = nullptr;

  /// |f'(s)| ~ deriv_coeff * s^deriv_degree (times log s when deriv_log_factor)
  /// as s -> inf. deriv_degree = +inf marks super-polynomial growth.
  double deriv_degree = 0.0;
  double deriv_coeff = 1.0;
  bool deriv_log_factor = false;

  /// value() is defined for s > domain_lo (or s >= domain_lo when closed).
  double domain_lo;
};

const AnalyticFn* find_analytic(const std::string& name);
const std::vector<const AnalyticFn*>& analytic_registry();

}  // namespace blowup
