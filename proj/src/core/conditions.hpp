#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/kinetics.hpp"
#include "core/source.hpp"

namespace blowup {

struct GrowthReport {
  double p = 0.0;
  double C = 0.0;
  bool holds = false;
  /// The bound keeps holding as s -> inf (degree and leading-coefficient
  /// comparison beyond the explicitly checked range).
  bool asymptotic_ok = false;
  int n_checked = 0;
  /// Analytic pieces are checked on sample grids, not proven.
  bool sampled_only = false;
  std::optional<std::pair<double, double>> counterexample;  // witness pair (s, r)
  double counterexample_ratio = 0.0;  // |f(r)-f(s)| / ((1+|r|^{p-1}+|s|^{p-1}) |r-s|)
  int counterexample_level = -1;      // tower collar level of the witness, if any
  std::string detail;

  nlohmann::json to_json() const;
};

/// Checks |f(r) - f(s)| <= C (1 + |r|^{p-1} + |s|^{p-1}) |r - s| for all
/// pairs in coverage. Pairs clustered at one point make the pointwise test
/// |f'(u)| <= C (1 + 2 |u|^{p-1}) necessary; for p >= 2 it is sufficient
/// too (|u|^{p-1} is convex). Tower sources are checked level by level in
/// the log2 domain, n = 1..n_max.
GrowthReport growth_condition_check(const PiecewiseSource& f, double p, double C, int n_max = 8);

struct MinimalGrowthExponent {
  std::optional<double> p;  // empty: the grid was exhausted
  std::vector<GrowthReport> reports;
};
/// First exponent on the (ascending) grid for which the check holds.
MinimalGrowthExponent minimal_growth_exponent(const PiecewiseSource& f, double C,
                                              const std::vector<double>& p_grid, int n_max = 8);

struct WellposednessWindow {
  double p = 0.0;
  int N = 0;
  double q_threshold = 0.0;  // N (p - 1) / 2
  std::string description;

  /// q admissible iff q > threshold and q >= 1, or q == threshold and q > 1.
  bool contains(double q) const;
  nlohmann::json to_json() const;
};
WellposednessWindow wellposedness_window(double p, int N);

/// sup |f'| over the coverage; empty when a slope is unbounded, a value
/// jump makes the source non-Lipschitz, or collar slopes grow without
/// bound (tower sources).
std::optional<double> uniform_lipschitz_bound(const PiecewiseSource& f);

/// Classification of the source from unit data: the verdict of T(1).
BlowupTimeResult no_blowup_classify(const PiecewiseSource& f, double tol = 1e-10);

}  // namespace blowup
