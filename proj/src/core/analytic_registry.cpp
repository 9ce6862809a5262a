#include "core/analytic_registry.hpp"

#include <cmath>
#include <limits>

namespace blowup {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sq_value(double s) { return s * s; }
double sq_deriv(double s) { return 2.0 * s; }
double sq_slope(double lo, double hi) { return 2.0 * std::max(std::fabs(lo), std::fabs(hi)); }
double sq_recip(double s) { return -1.0 / s; }
double sq_recip_inv(double r) { return -1.0 / r; }

double slog_value(double s) { return s * std::log(s); }
double slog_deriv(double s) { return std::log(s) + 1.0; }
double slog_slope(double lo, double hi) {
  if (lo <= 0.0) return kInf;
  return std::max(std::fabs(std::log(lo) + 1.0), std::fabs(std::log(hi) + 1.0));
}
// R(s) = log log s, valid for s > 1; diverges at both ends, so the tail
// integral of 1/(s log s) is infinite.
double slog_recip(double s) { return std::log(std::log(s)); }
double slog_recip_inv(double r) { return std::exp(std::exp(r)); }

double exp_value(double s) { return std::exp(s); }
double exp_slope(double lo, double hi) {
  (void)lo;
  return std::exp(hi);
}
double exp_recip(double s) { return -std::exp(-s); }
double exp_recip_inv(double r) { return -std::log(-r); }

const AnalyticFn kRegistry[] = {
    {"s_squared", sq_value, sq_deriv, sq_slope, true, sq_recip, 0.0, sq_recip_inv, 1.0, 2.0,
     false, -kInf},
    {"s_log_s", slog_value, slog_deriv, slog_slope, true, slog_recip, kInf, slog_recip_inv, 0.0,
     1.0, true, 0.0},
    {"exp_s", exp_value, exp_value, exp_slope, true, exp_recip, 0.0, exp_recip_inv, kInf, 1.0,
     false, -kInf},
};

}  // namespace

const std::vector<const AnalyticFn*>& analytic_registry() {
  static const std::vector<const AnalyticFn*> reg = [] {
    std::vector<const AnalyticFn*> v;
    for (const auto& fn : kRegistry) v.push_back(&fn);
    return v;
  }();
  return reg;
}

const AnalyticFn* find_analytic(const std::string& name) {
  for (const AnalyticFn* fn : analytic_registry())
    if (fn->name == name) return fn;
  return nullptr;
}

}  // namespace blowup
