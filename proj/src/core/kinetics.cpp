#include "core/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/errors.hpp"
#include "core/log2_scalar.hpp"
#include "core/phi.hpp"

namespace blowup {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.6931471805599453094172321214581766;

// Dormand-Prince 5(4) for autonomous u' = g(u).
struct DpStep {
  double u5 = 0.0;   // 5th order solution
  double err = 0.0;  // |u5 - u4|
};

template <class G>
DpStep dp45(const G& g, double u, double h) {
  const double k1 = g(u);
  const double k2 = g(u + h * (0.2 * k1));
  const double k3 = g(u + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
  const double k4 = g(u + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
  const double k5 = g(u + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                               64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
  const double k6 =
      g(u + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3 +
                 49.0 / 176.0 * k4 - 5103.0 / 18656.0 * k5));
  const double du5 = 35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 -
                     2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6;
  const double u5 = u + h * du5;
  const double k7 = g(u5);
  const double du4 = 5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 + 393.0 / 640.0 * k4 -
                     92097.0 / 339200.0 * k5 + 187.0 / 2100.0 * k6 + 1.0 / 40.0 * k7;
  DpStep out;
  out.u5 = u5;
  out.err = std::fabs(h * (du5 - du4));
  return out;
}

struct RkExit {
  enum What { TimeUp, Boundary, Guard } what = TimeUp;
  double u = 0.0;
  double t_used = 0.0;
  double err = 0.0;
};

RkExit rk_advance(const AnalyticFn& fn, double u0, double budget, double lo, double hi,
                  const IntegratorOptions& opts) {
  auto g = [&fn](double s) { return fn.value(s); };
  RkExit out;
  double u = u0;
  double tu = 0.0;
  double err = 0.0;
  double g0 = g(u);
  double h = std::min(budget, 0.01 * (1.0 + std::fabs(u)) / (std::fabs(g0) + 1e-300));
  long steps = 0;
  while (tu < budget) {
    require(++steps <= opts.max_steps, Errc::instability,
            "flow: integrator exceeded its step budget");
    double gu = g(u);
    if (gu == 0.0) {  // fixed point absorbs the rest of the horizon
      out.u = u;
      out.t_used = budget;
      out.err = err;
      return out;
    }
    h = std::min(h, budget - tu);
    DpStep s = dp45(g, u, h);
    double tol_step = opts.abs_tol + opts.rel_tol * std::max(std::fabs(u), std::fabs(s.u5));
    if (!std::isfinite(s.u5)) {
      h *= 0.25;
      continue;
    }
    if (s.err > tol_step) {
      h *= std::max(0.2, 0.9 * std::pow(tol_step / s.err, 0.2));
      continue;
    }
    if (s.u5 > hi || s.u5 < lo) {
      // Bisect the step size so the accepted step lands on the boundary.
      double beta = s.u5 > hi ? hi : lo;
      double dirb = s.u5 > hi ? 1.0 : -1.0;
      double h_in = 0.0, h_out = h;
      for (int it = 0; it < 80; ++it) {
        double hm = 0.5 * (h_in + h_out);
        DpStep sm = dp45(g, u, hm);
        if ((sm.u5 - beta) * dirb >= 0.0)
          h_out = hm;
        else
          h_in = hm;
      }
      out.what = RkExit::Boundary;
      out.u = beta;
      out.t_used = tu + h_out;
      out.err = err + s.err;
      return out;
    }
    u = s.u5;
    tu += h;
    err += s.err;
    if (std::fabs(u) > opts.guard) {
      out.what = RkExit::Guard;
      out.u = u;
      out.t_used = tu;
      out.err = err;
      return out;
    }
    h *= std::clamp(0.9 * std::pow(tol_step / std::max(s.err, 1e-300), 0.2), 1.0, 5.0);
  }
  out.u = u;
  out.t_used = tu;
  out.err = err;
  return out;
}

struct SegmentView {
  PieceKind kind;
  double lo, hi;
  const Piece* piece;  // null for the virtual tail segment
  double tail_value;
};

FlowResult alive(double value, double t, long traversed, double err) {
  require(std::isfinite(value), Errc::range, "flow: value exceeded double range");
  FlowResult out;
  out.status = FlowStatus::Alive;
  out.value = value;
  out.t = t;
  out.pieces_traversed = traversed;
  out.err = err;
  return out;
}

}  // namespace

FlowResult flow(const PiecewiseSource& f, double z0, double t, const IntegratorOptions& opts) {
  require(std::isfinite(z0), Errc::invalid_argument, "flow: z0 must be finite");
  require(std::isfinite(t) && t >= 0.0, Errc::invalid_argument, "flow: t must be finite and >= 0");
  const auto& pieces = f.pieces();
  std::size_t idx = f.piece_index(z0);

  double z = z0;
  double remaining = t;
  double elapsed_err = 0.0;
  long traversed = 0;
  const long max_transitions = static_cast<long>(pieces.size()) * 4 + 64;

  while (true) {
    require(traversed <= max_transitions, Errc::internal, "flow: too many piece transitions");

    SegmentView seg;
    if (idx == pieces.size()) {
      require(f.tail() == TailRule::RepeatLastConstant, Errc::range,
              "flow: trajectory beyond explicit coverage");
      seg = {PieceKind::Constant, f.coverage_hi(), kInf, nullptr, f.tail_constant()};
    } else {
      const Piece& p = pieces[idx];
      seg = {p.kind, p.lo, p.hi, &p, 0.0};
    }

    double fz = seg.piece ? seg.piece->eval(z) : seg.tail_value;
    if (remaining == 0.0 || fz == 0.0) return alive(z, t, traversed, elapsed_err);

    int dir = fz > 0.0 ? 1 : -1;
    if (dir < 0 && z == seg.lo) {
      require(idx > 0, Errc::domain, "flow: trajectory leaves coverage from below");
      double fl = pieces[idx - 1].end_value();
      // Opposing signs across the breakpoint pin the trajectory there.
      if (fl >= 0.0) return alive(z, t, traversed, elapsed_err);
      --idx;
      ++traversed;
      continue;
    }

    switch (seg.kind) {
      case PieceKind::Constant: {
        double c = fz;
        double beta = dir > 0 ? seg.hi : seg.lo;
        if (std::isinf(beta)) return alive(z + c * remaining, t, traversed, elapsed_err);
        double cross = (beta - z) / c;
        if (cross > remaining) return alive(z + c * remaining, t, traversed, elapsed_err);
        z = beta;
        remaining -= cross;
        ++traversed;
        if (dir > 0) ++idx;
        break;
      }
      case PieceKind::Affine: {
        const Piece& p = *seg.piece;
        if (p.slope == 0.0) {
          double c = fz;
          double beta = dir > 0 ? seg.hi : seg.lo;
          if (std::isinf(beta)) return alive(z + c * remaining, t, traversed, elapsed_err);
          double cross = (beta - z) / c;
          if (cross > remaining) return alive(z + c * remaining, t, traversed, elapsed_err);
          z = beta;
          remaining -= cross;
          ++traversed;
          if (dir > 0) ++idx;
          break;
        }
        double a = p.slope;
        double v = fz;
        double beta = dir > 0 ? seg.hi : seg.lo;
        auto in_piece = [&](double dt) { return z + (v / a) * std::expm1(a * dt); };
        if (std::isinf(beta)) return alive(in_piece(remaining), t, traversed, elapsed_err);
        double q = p.eval(beta) / v;
        if (q <= 0.0) return alive(in_piece(remaining), t, traversed, elapsed_err);
        double cross = std::log(q) / a;
        if (cross > remaining) return alive(in_piece(remaining), t, traversed, elapsed_err);
        z = beta;
        remaining -= cross;
        ++traversed;
        if (dir > 0) ++idx;
        break;
      }
      case PieceKind::Analytic: {
        const AnalyticFn& fn = *seg.piece->fn;
        RkExit ex = rk_advance(fn, z, remaining, seg.lo, seg.hi, opts);
        remaining -= ex.t_used;
        elapsed_err += ex.err;
        if (ex.what == RkExit::TimeUp) return alive(ex.u, t, traversed, elapsed_err);
        if (ex.what == RkExit::Boundary) {
          z = ex.u;
          ++traversed;
          if (ex.u == seg.hi) ++idx;
          break;
        }
        // Guard: hand off to the reciprocal antiderivative.
        double u = ex.u;
        require(u > 0.0 && fn.has_recip_antideriv && std::isinf(seg.hi), Errc::range,
                "flow: trajectory exceeded the representable range");
        double r_now = fn.recip_antideriv(u);
        double r_target = r_now + remaining;
        if (r_target >= fn.recip_limit) {
          FlowResult out;
          out.status = FlowStatus::BlownUp;
          out.blowup_time = (t - remaining) + (fn.recip_limit - r_now);
          out.t = t;
          out.pieces_traversed = traversed;
          out.err = elapsed_err;
          return out;
        }
        double v = fn.recip_antideriv_inv(r_target);
        return alive(v, t, traversed, elapsed_err);
      }
    }
  }
}

namespace {

void push_segment(BlowupEvidence& ev, const std::string& label, double lo, double hi,
                  double contribution, double& total) {
  total += contribution;
  ev.segments.push_back({label, lo, hi, contribution, total});
}

std::string kind_label(const Piece& p) {
  switch (p.kind) {
    case PieceKind::Constant:
      return "constant";
    case PieceKind::Affine:
      return "affine";
    case PieceKind::Analytic:
      return "analytic:" + p.fn->name;
  }
  return "?";
}

// Ladder over the tower levels beyond the explicit pieces, in log2 domain.
void phi_tail_ladder(const PhiMeta& meta, BlowupEvidence& ev, double& total) {
  const int n_end = std::max(20, meta.n_max);
  for (int n = meta.n_explicit + 1; n <= n_end; ++n) {
    // Collar: (1/a_n) ln(plateau_n / entry_n); underflows to 0 quickly.
    LogScalar a = phi::collar_slope_log(n);
    double dl2 = phi::plateau_value_log(n).l2 - phi::collar_entry_value_log(n).l2;
    double collar = std::exp2(std::log2(dl2 * kLn2) - a.l2);
    push_segment(ev, "collar:" + std::to_string(n), std::nan(""), std::nan(""), collar, total);
    // Plateau: (L - 1) / L with L = phi_{n+1} - phi_n.
    double l2 = phi::plateau_value_log(n).l2;
    double plateau = -std::expm1(-l2 * kLn2);
    push_segment(ev, "plateau:" + std::to_string(n), std::nan(""), std::nan(""), plateau, total);
  }
  ev.basis =
      "tower ladder: plateau n contributes (L-1)/L with L = phi_{n+1} - phi_n, "
      "which is >= 11/12 for n >= 1 and increases toward 1; the series diverges";
}

}  // namespace

BlowupTimeResult blowup_time(const PiecewiseSource& f, double z0, double tol) {
  require(std::isfinite(z0), Errc::invalid_argument, "blowup_time: z0 must be finite");
  require(tol > 0.0 && std::isfinite(tol), Errc::invalid_argument,
          "blowup_time: tol must be positive");
  const auto& pieces = f.pieces();
  std::size_t idx0 = f.piece_index(z0);

  BlowupTimeResult out;
  double total = 0.0;
  double err = 0.0;
  double x = z0;

  for (std::size_t i = idx0; i < pieces.size(); ++i) {
    const Piece& p = pieces[i];
    double x0 = std::max(x, p.lo);
    if (std::isinf(p.hi)) {
      // Terminal unbounded piece decides the verdict.
      switch (p.kind) {
        case PieceKind::Constant: {
          require(p.value > 0.0, Errc::positivity, "blowup_time: source not positive on tail");
          double h = std::max(1.0, std::fabs(x0));
          double lo = x0;
          for (int k = 0; k < 20; ++k) {
            push_segment(out.evidence, "tail:2^" + std::to_string(k), lo, lo + h * std::exp2(k),
                         h * std::exp2(k) / p.value, total);
            lo += h * std::exp2(k);
          }
          out.verdict = BlowupVerdict::Infinite;
          out.time = kInf;
          out.evidence.uniform_lower_bound = h / p.value;
          out.evidence.basis = "constant tail: dyadic segments contribute length/value";
          return out;
        }
        case PieceKind::Affine: {
          double v0 = p.eval(x0);
          require(v0 > 0.0 && p.slope >= 0.0, Errc::positivity,
                  "blowup_time: source not positive on tail");
          if (p.slope == 0.0) {
            // Degenerate affine, same as the constant case.
            double h = std::max(1.0, std::fabs(x0));
            for (int k = 0; k < 20; ++k)
              push_segment(out.evidence, "tail:2^" + std::to_string(k), std::nan(""),
                           std::nan(""), h * std::exp2(k) / v0, total);
            out.verdict = BlowupVerdict::Infinite;
            out.time = kInf;
            out.evidence.uniform_lower_bound = h / v0;
            out.evidence.basis = "constant tail: dyadic segments contribute length/value";
            return out;
          }
          // Log divergence: dyadic segments contribute ~ln(2)/slope each.
          double lo = std::max(x0, p.anchor_s - p.anchor_value / p.slope + 1.0);
          double ulb = kInf;
          for (int k = 0; k < 20; ++k) {
            double hi2 = 2.0 * lo;
            double c = std::log(p.eval(hi2) / p.eval(lo)) / p.slope;
            push_segment(out.evidence, "tail:2^" + std::to_string(k), lo, hi2, c, total);
            ulb = std::min(ulb, c);
            lo = hi2;
          }
          out.verdict = BlowupVerdict::Infinite;
          out.time = kInf;
          out.evidence.uniform_lower_bound = ulb;
          out.evidence.basis = "affine tail: doubling segments each contribute about ln(2)/slope";
          return out;
        }
        case PieceKind::Analytic: {
          const AnalyticFn& fn = *p.fn;
          require(fn.value(x0) > 0.0, Errc::positivity,
                  "blowup_time: source not positive at the tail start");
          if (fn.has_recip_antideriv) {
            if (std::isinf(fn.recip_limit)) {
              // Divergent tail: squaring ladder gives uniformly bounded terms.
              double s = std::max(x0, 2.0);
              RecipIntegral head = reciprocal_piece_integral(p, x0, s, tol);
              if (head.value > 0.0)
                push_segment(out.evidence, "analytic:" + fn.name, x0, s, head.value, total);
              double ulb = kInf;
              int k = 0;
              while (s < 1e150 && k < 20) {
                double s2 = s * s;
                double c = fn.recip_antideriv(s2) - fn.recip_antideriv(s);
                push_segment(out.evidence, "tail:sq" + std::to_string(k), s, s2, c, total);
                ulb = std::min(ulb, c);
                s = s2;
                ++k;
              }
              out.verdict = BlowupVerdict::Infinite;
              out.time = kInf;
              out.evidence.uniform_lower_bound = ulb;
              out.evidence.basis =
                  "reciprocal antiderivative diverges; squaring segments contribute uniformly";
              return out;
            }
            double tail = fn.recip_limit - fn.recip_antideriv(x0);
            push_segment(out.evidence, "analytic:" + fn.name, x0, kInf, tail, total);
            out.verdict = BlowupVerdict::Finite;
            out.time = total;
            out.err = err + 8.0 * std::numeric_limits<double>::epsilon() * std::fabs(total);
            out.evidence.basis = "closed-form reciprocal antiderivative on the tail";
            return out;
          }
          // No antiderivative: probe doubling segments by quadrature.
          double lo = std::max(x0, 1.0);
          if (lo > x0) {
            RecipIntegral head = reciprocal_piece_integral(p, x0, lo, tol);
            push_segment(out.evidence, "analytic:" + fn.name, x0, lo, head.value, total);
            err += head.err;
          }
          std::vector<double> contribs;
          for (int k = 0; k < 24; ++k) {
            double hi2 = 2.0 * lo;
            RecipIntegral c = reciprocal_piece_integral(p, lo, hi2, tol);
            push_segment(out.evidence, "tail:2^" + std::to_string(k), lo, hi2, c.value, total);
            contribs.push_back(c.value);
            err += c.err;
            lo = hi2;
          }
          // Geometric decay of segment contributions certifies a finite tail.
          bool geometric = true;
          double r = 0.0;
          for (std::size_t k = contribs.size() - 6; k + 1 < contribs.size(); ++k) {
            double ratio = contribs[k + 1] / contribs[k];
            if (!(ratio < 0.9)) geometric = false;
            r = std::max(r, ratio);
          }
          if (geometric) {
            double tail_bound = contribs.back() * r / (1.0 - r);
            out.verdict = BlowupVerdict::Finite;
            out.time = total + 0.5 * tail_bound;
            out.err = err + 0.5 * tail_bound;
            out.evidence.basis = "doubling segments decay geometrically; tail bounded by ratio";
            return out;
          }
          double ulb = *std::min_element(contribs.end() - 6, contribs.end());
          if (ulb > 1e-8) {
            out.verdict = BlowupVerdict::Infinite;
            out.time = kInf;
            out.evidence.uniform_lower_bound = ulb;
            out.evidence.basis = "doubling segments keep contributing above a positive floor";
            return out;
          }
          out.verdict = BlowupVerdict::Inconclusive;
          out.lower_bound = total;
          out.evidence.basis = "segment contributions neither decay geometrically nor stay "
                               "bounded below; accumulated integral is a lower bound";
          return out;
        }
      }
    }
    RecipIntegral c = reciprocal_piece_integral(p, x0, p.hi, tol);
    push_segment(out.evidence, kind_label(p), x0, p.hi, c.value, total);
    err += c.err;
    x = p.hi;
  }

  switch (f.tail()) {
    case TailRule::RepeatLastConstant: {
      double c = f.tail_constant();
      require(c > 0.0, Errc::positivity, "blowup_time: source not positive in tail");
      double start = std::max(x, z0);
      double h = std::max(1.0, std::fabs(start));
      double lo = start;
      for (int k = 0; k < 20; ++k) {
        push_segment(out.evidence, "tail:2^" + std::to_string(k), lo, lo + h * std::exp2(k),
                     h * std::exp2(k) / c, total);
        lo += h * std::exp2(k);
      }
      out.verdict = BlowupVerdict::Infinite;
      out.time = kInf;
      out.evidence.uniform_lower_bound = h / c;
      out.evidence.basis = "held constant tail: dyadic segments contribute length/value";
      return out;
    }
    case TailRule::AnalyticExtension: {
      require(f.phi_meta().has_value(), Errc::internal,
              "blowup_time: analytic extension without construction metadata");
      phi_tail_ladder(*f.phi_meta(), out.evidence, total);
      out.verdict = BlowupVerdict::Infinite;
      out.time = kInf;
      double ulb = kInf;
      for (const auto& s : out.evidence.segments) {
        bool plateau_like = s.label.rfind("plateau:", 0) == 0 ||
                            (s.label == "constant" && s.lo >= 4.0);
        if (plateau_like) ulb = std::min(ulb, s.contribution);
      }
      out.evidence.uniform_lower_bound = std::isinf(ulb) ? 0.0 : ulb;
      return out;
    }
    case TailRule::TruncationError: {
      out.verdict = BlowupVerdict::Inconclusive;
      out.lower_bound = total;
      out.err = err;
      out.evidence.basis = "coverage truncated; accumulated integral is a lower bound";
      return out;
    }
  }
  fail(Errc::internal, "blowup_time: unreachable");
}

double invert_blowup_time(const PiecewiseSource& f, double eps, double tol) {
  require(std::isfinite(eps) && eps > 0.0, Errc::invalid_argument,
          "invert_blowup_time: eps must be positive");
  require(tol > 0.0, Errc::invalid_argument, "invert_blowup_time: tol must be positive");
  const double inner_tol = tol / 8.0;
  auto T = [&](double z) {
    BlowupTimeResult r = blowup_time(f, z, inner_tol);
    require(r.verdict == BlowupVerdict::Finite, Errc::domain,
            "invert_blowup_time: blow-up time is not finite along the bracket");
    return r.time;
  };
  double t1 = T(1.0);
  require(eps <= t1, Errc::domain, "invert_blowup_time: eps exceeds the blow-up time at z = 1");
  if (eps == t1) return 1.0;

  double zl = 1.0, zh = 2.0;
  int grow = 0;
  while (T(zh) >= eps) {
    zl = zh;
    zh *= 2.0;
    require(++grow < 1000 && zh < 1e300, Errc::domain,
            "invert_blowup_time: failed to bracket the target time");
  }
  double zm = zl;
  for (int it = 0; it < 200; ++it) {
    zm = zh / zl > 4.0 ? std::sqrt(zl * zh) : 0.5 * (zl + zh);
    double tm = T(zm);
    if (std::fabs(tm - eps) <= tol && (zh - zl) <= tol * std::max(1.0, zm)) return zm;
    if (tm >= eps)
      zl = zm;
    else
      zh = zm;
  }
  return zm;
}

EnvelopeReport comparison_envelope(const PiecewiseSource& f, double x0, double y0, double z0,
                                   const std::vector<double>& grid,
                                   const IntegratorOptions& opts) {
  require(x0 <= y0 && y0 <= z0, Errc::invalid_argument,
          "comparison_envelope: need x0 <= y0 <= z0");
  require(!grid.empty(), Errc::invalid_argument, "comparison_envelope: empty grid");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    require(grid[i] <= grid[i + 1], Errc::invalid_argument,
            "comparison_envelope: grid must be sorted");
  EnvelopeReport rep;
  for (double t : grid) {
    FlowResult fx = flow(f, x0, t, opts);
    FlowResult fy = flow(f, y0, t, opts);
    FlowResult fz = flow(f, z0, t, opts);
    if (fx.status != FlowStatus::Alive || fy.status != FlowStatus::Alive ||
        fz.status != FlowStatus::Alive) {
      rep.truncated_at = t;
      break;
    }
    rep.entries.push_back({t, fx.value, fy.value, fz.value});
    double v = std::max({0.0, fx.value - fy.value, fy.value - fz.value});
    rep.max_violation = std::max(rep.max_violation, v);
  }
  return rep;
}

}  // namespace blowup
