#include "core/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/errors.hpp"
#include "core/log2_scalar.hpp"
#include "core/phi.hpp"

namespace blowup {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pair_ratio(const PiecewiseSource& f, double s, double r, double p) {
  double num = std::fabs(f.eval(r) - f.eval(s));
  double den = (1.0 + std::pow(std::fabs(r), p - 1.0) + std::pow(std::fabs(s), p - 1.0)) *
               std::fabs(r - s);
  return num / den;
}

// Witness ratio for a tower collar in the log2 domain: a_n over
// (1 + smin^{p-1} + smax^{p-1}), with smin/smax the collar endpoints.
double tower_collar_ratio_log(int n, double p) {
  LogScalar a = phi::collar_slope_log(n);
  LogScalar half = LogScalar::from_double(0.5);
  LogScalar smin = phi::phi_log(n) - half;
  LogScalar smax = phi::phi_log(n) + half;
  LogScalar den = LogScalar::one() + smin.pow_abs(p - 1.0) + smax.pow_abs(p - 1.0);
  return (a / den).to_double();
}

GrowthReport tower_growth_check(const PiecewiseSource& f, double p, double C, int n_levels) {
  GrowthReport rep;
  rep.p = p;
  rep.C = C;
  rep.n_checked = n_levels;

  // Per level: clustered pairs inside collar n are extremal (longer-range
  // secants are diluted by the plateau widths), so the all-pairs condition
  // restricted to the collar is a_n <= C (1 + 2 (phi_n - 1/2)^{p-1}).
  LogScalar cL = LogScalar::from_double(C);
  LogScalar one = LogScalar::one();
  LogScalar two = LogScalar::from_double(2.0);
  LogScalar half = LogScalar::from_double(0.5);
  int violating = -1;
  for (int n = 1; n <= n_levels; ++n) {
    LogScalar a = phi::collar_slope_log(n);
    LogScalar smin = phi::phi_log(n) - half;
    LogScalar rhs = cL * (one + two * smin.pow_abs(p - 1.0));
    if (a.compare(rhs) > 0) {
      violating = n;
      break;
    }
  }

  // Beyond the checked levels the slopes grow like phi_n^2 against a bound
  // of order 2 C phi_n^{p-1}.
  if (p > 3.0 + 1e-12)
    rep.asymptotic_ok = true;
  else if (std::fabs(p - 3.0) <= 1e-12)
    rep.asymptotic_ok = C >= 0.5;
  else
    rep.asymptotic_ok = false;

  if (violating < 0 && rep.asymptotic_ok) {
    rep.holds = true;
    rep.detail = "collar slopes clear C (1 + 2 smin^{p-1}) on every checked level and the "
                 "degree comparison extends the bound to all deeper levels";
    return rep;
  }
  rep.holds = false;
  if (violating < 0) {
    // Checked levels pass but the trend reverses for deeper n: surface the
    // first violating level by scanning onward.
    int n = n_levels + 1;
    for (; n <= 4000; ++n) {
      LogScalar a = phi::collar_slope_log(n);
      LogScalar rhs = cL * (one + two * (phi::phi_log(n) - half).pow_abs(p - 1.0));
      if (a.compare(rhs) > 0) break;
    }
    violating = n;
  }
  rep.counterexample_level = violating;
  rep.counterexample_ratio = tower_collar_ratio_log(violating, p);
  double s = violating <= phi::kFloatCollarMax
                 ? std::exp2(static_cast<double>(phi::log2_phi(violating))) - 0.5
                 : std::nan("");
  double r = std::isnan(s) ? std::nan("") : s + 1.0;
  rep.counterexample = std::make_pair(s, r);
  std::ostringstream os;
  os << "collar level " << violating << " violates the bound: slope a_n exceeds "
     << "C (1 + smin^{p-1} + smax^{p-1}) by ratio " << rep.counterexample_ratio / C;
  if (violating > phi::kFloatCollarMax)
    os << " (witness endpoints are below float resolution; ratio computed in log2 domain)";
  rep.detail = os.str();
  return rep;
}

GrowthReport generic_growth_check(const PiecewiseSource& f, double p, double C, int n_max) {
  GrowthReport rep;
  rep.p = p;
  rep.C = C;
  rep.asymptotic_ok = true;
  (void)n_max;

  auto factor2_bound = [&](double u) { return C * (1.0 + 2.0 * std::pow(std::fabs(u), p - 1.0)); };
  auto factor1_bound = [&](double u) { return C * (1.0 + std::pow(std::fabs(u), p - 1.0)); };

  bool factor1_ok = true;
  const auto& pieces = f.pieces();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const Piece& pc = pieces[i];
    ++rep.n_checked;

    // Value jumps defeat every Lipschitz-type bound.
    if (i + 1 < pieces.size()) {
      double vl = pc.end_value();
      double vr = pieces[i + 1].start_value();
      double scale = std::max({1.0, std::fabs(vl), std::fabs(vr)});
      if (std::fabs(vl - vr) > 1e-12 * scale) {
        rep.holds = false;
        double bp = pc.hi;
        double delta = 1e-9 * std::max(1.0, std::fabs(bp));
        rep.counterexample = std::make_pair(bp - delta, bp + delta);
        rep.counterexample_ratio = pair_ratio(f, bp - delta, bp + delta, p);
        rep.detail = "value jump at a breakpoint; clustered pairs have unbounded ratio";
        return rep;
      }
    }

    // Sample points of the piece, log-spaced toward large |u|.
    std::vector<double> samples;
    double lo = std::isinf(pc.lo) ? -1e12 : pc.lo;
    double hi = std::isinf(pc.hi) ? std::max(1e12, 4.0 * std::fabs(lo) + 1.0) : pc.hi;
    for (int k = 0; k <= 48; ++k) {
      double x = lo + (hi - lo) * (static_cast<double>(k) / 48.0);
      samples.push_back(x);
    }
    if (pc.kind == PieceKind::Analytic && std::isfinite(pc.lo)) {
      for (int k = 0; k <= 40; ++k)
        samples.push_back(pc.lo + std::pow(10.0, -6.0 + 0.45 * k));  // log-spaced offsets
    }

    auto deriv_at = [&](double u) -> double {
      switch (pc.kind) {
        case PieceKind::Constant:
          return 0.0;
        case PieceKind::Affine:
          return pc.slope;
        case PieceKind::Analytic:
          return pc.fn->deriv(u);
      }
      return 0.0;
    };

    switch (pc.kind) {
      case PieceKind::Constant:
        break;
      case PieceKind::Affine: {
        double m = (pc.lo <= 0.0 && pc.hi >= 0.0)
                       ? 0.0
                       : std::min(std::fabs(std::isinf(pc.lo) ? pc.hi : pc.lo),
                                  std::fabs(std::isinf(pc.hi) ? pc.lo : pc.hi));
        if (std::fabs(pc.slope) > factor2_bound(m) * (1.0 + 1e-12)) {
          rep.holds = false;
          double u = (pc.lo <= 0.0 && pc.hi >= 0.0) ? 0.0
                     : (std::fabs(pc.lo) < std::fabs(pc.hi) ? pc.lo : pc.hi);
          double delta = std::min(1e-6 * (1.0 + std::fabs(u)), 0.25 * (pc.hi - pc.lo));
          double s = std::max(pc.lo, u - delta), r = std::min(pc.hi, u + delta);
          rep.counterexample = std::make_pair(s, r);
          rep.counterexample_ratio = pair_ratio(f, s, r, p);
          rep.detail = "affine slope exceeds the clustered-pair bound at the piece edge";
          return rep;
        }
        if (std::fabs(pc.slope) > factor1_bound(m)) factor1_ok = false;
        break;
      }
      case PieceKind::Analytic: {
        rep.sampled_only = true;
        // Asymptotic degree comparison first, so a sampled violation below
        // still returns with the tail verdict filled in.
        if (std::isinf(pc.hi)) {
          const AnalyticFn& fn = *pc.fn;
          if (std::isinf(fn.deriv_degree) || fn.deriv_degree > p - 1.0 + 1e-12)
            rep.asymptotic_ok = false;
          else if (std::fabs(fn.deriv_degree - (p - 1.0)) <= 1e-12)
            rep.asymptotic_ok = !fn.deriv_log_factor && fn.deriv_coeff <= 2.0 * C + 1e-12;
        }
        for (double u : samples) {
          if (u < pc.lo || u > pc.hi || !std::isfinite(u)) continue;
          double d = std::fabs(deriv_at(u));
          if (d > factor2_bound(u) * (1.0 + 1e-12)) {
            rep.holds = false;
            double delta = 1e-6 * (1.0 + std::fabs(u));
            double s = std::max(pc.lo, u - delta), r = u + delta;
            rep.counterexample = std::make_pair(s, r);
            rep.counterexample_ratio = pair_ratio(f, s, r, p);
            rep.detail = "sampled derivative exceeds the clustered-pair bound";
            return rep;
          }
          if (d > factor1_bound(u)) factor1_ok = false;
        }
        break;
      }
    }
  }

  if (!rep.asymptotic_ok) {
    rep.holds = false;
    rep.detail = "derivative growth outruns C (1 + 2 |u|^{p-1}) for large |u|";
    return rep;
  }
  if (p >= 2.0 - 1e-12) {
    // |u|^{p-1} convex: the clustered-pair bound integrates to the full
    // two-point bound, so passing it everywhere is sufficient.
    rep.holds = true;
    rep.detail = "pointwise |f'(u)| <= C (1 + 2 |u|^{p-1}) holds; convexity of |u|^{p-1} "
                 "upgrades it to all pairs";
    return rep;
  }
  rep.holds = factor1_ok;
  rep.detail = factor1_ok
                   ? "pointwise |f'(u)| <= C (1 + |u|^{p-1}) holds, which bounds all pairs"
                   : "indeterminate for p < 2: the necessary clustered-pair bound holds but "
                     "the sufficient single-endpoint bound fails; reporting not-held";
  return rep;
}

}  // namespace

GrowthReport growth_condition_check(const PiecewiseSource& f, double p, double C, int n_max) {
  require(std::isfinite(p) && p > 1.0, Errc::invalid_argument,
          "growth_condition_check: p > 1 required");
  require(std::isfinite(C) && C > 0.0, Errc::invalid_argument,
          "growth_condition_check: C > 0 required");
  require(n_max >= 1, Errc::invalid_argument, "growth_condition_check: n_max >= 1 required");
  if (f.phi_meta()) {
    int levels = std::max(n_max, f.phi_meta()->n_max);
    return tower_growth_check(f, p, C, levels);
  }
  return generic_growth_check(f, p, C, n_max);
}

MinimalGrowthExponent minimal_growth_exponent(const PiecewiseSource& f, double C,
                                              const std::vector<double>& p_grid, int n_max) {
  require(!p_grid.empty(), Errc::invalid_argument, "minimal_growth_exponent: empty grid");
  std::vector<double> grid = p_grid;
  std::sort(grid.begin(), grid.end());
  MinimalGrowthExponent out;
  for (double p : grid) {
    GrowthReport rep = growth_condition_check(f, p, C, n_max);
    bool hit = rep.holds;
    out.reports.push_back(std::move(rep));
    if (hit) {
      out.p = p;
      break;
    }
  }
  return out;
}

bool WellposednessWindow::contains(double q) const {
  if (!std::isfinite(q)) return false;
  double tol = 1e-12 * std::max(1.0, std::fabs(q_threshold));
  if (std::fabs(q - q_threshold) <= tol) return q > 1.0 + 1e-12;
  return q > q_threshold && q >= 1.0;
}

WellposednessWindow wellposedness_window(double p, int N) {
  require(std::isfinite(p) && p > 1.0, Errc::invalid_argument,
          "wellposedness_window: p > 1 required");
  require(N >= 1, Errc::invalid_argument, "wellposedness_window: N >= 1 required");
  WellposednessWindow w;
  w.p = p;
  w.N = N;
  w.q_threshold = static_cast<double>(N) * (p - 1.0) / 2.0;
  std::ostringstream os;
  os << "q admissible iff q > " << w.q_threshold << " and q >= 1, or q = " << w.q_threshold
     << " with q > 1";
  w.description = os.str();
  return w;
}

std::optional<double> uniform_lipschitz_bound(const PiecewiseSource& f) {
  if (f.phi_meta()) return std::nullopt;  // collar slopes are unbounded in n
  double sup = 0.0;
  const auto& pieces = f.pieces();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const Piece& p = pieces[i];
    switch (p.kind) {
      case PieceKind::Constant:
        break;
      case PieceKind::Affine:
        sup = std::max(sup, std::fabs(p.slope));
        break;
      case PieceKind::Analytic: {
        double b = p.fn->slope_bound(p.lo, p.hi);
        if (!std::isfinite(b)) return std::nullopt;
        sup = std::max(sup, b);
        break;
      }
    }
    if (i + 1 < pieces.size()) {
      double vl = p.end_value();
      double vr = pieces[i + 1].start_value();
      double scale = std::max({1.0, std::fabs(vl), std::fabs(vr)});
      if (std::fabs(vl - vr) > 1e-12 * scale) return std::nullopt;  // jump
    }
  }
  return sup;
}

BlowupTimeResult no_blowup_classify(const PiecewiseSource& f, double tol) {
  return blowup_time(f, 1.0, tol);
}

nlohmann::json GrowthReport::to_json() const {
  nlohmann::json j;
  j["p"] = p;
  j["C"] = C;
  j["holds"] = holds;
  j["asymptotic_ok"] = asymptotic_ok;
  j["n_checked"] = n_checked;
  j["sampled_only"] = sampled_only;
  if (counterexample) {
    j["counterexample"] = {{"s", counterexample->first},
                           {"r", counterexample->second},
                           {"ratio", counterexample_ratio},
                           {"level", counterexample_level}};
  }
  j["detail"] = detail;
  return j;
}

nlohmann::json WellposednessWindow::to_json() const {
  nlohmann::json j;
  j["p"] = p;
  j["N"] = N;
  j["q_threshold"] = q_threshold;
  j["description"] = description;
  return j;
}

}  // namespace blowup
