#pragma once

#include <functional>

namespace blowup {

struct QuadResult {
  double value = 0.0;
  double err = 0.0;
  long evals = 0;
  bool converged = true;
};

/// Adaptive Gauss-Kronrod 7/15, globally adaptive: the panel with the
/// largest error estimate is bisected until the summed error meets abs_tol,
/// so the budget can concentrate at singular endpoints. converged reports
/// whether the bound was met before the depth and evaluation guards.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double abs_tol, int max_depth = 52);

}  // namespace blowup
