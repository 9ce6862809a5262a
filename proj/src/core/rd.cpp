#include "core/rd.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "core/errors.hpp"
#include "core/kinetics.hpp"

namespace blowup {

namespace {

void validate_cfg(const SolverConfig& cfg) {
  require(std::isfinite(cfg.dt) && cfg.dt > 0.0, Errc::invalid_argument, "rd: dt > 0 required");
  require(cfg.theta >= 0.0 && cfg.theta <= 1.0, Errc::invalid_argument,
          "rd: theta in [0, 1] required");
  require(std::isfinite(cfg.horizon) && cfg.horizon > 0.0, Errc::invalid_argument,
          "rd: horizon > 0 required");
  require(cfg.overflow_guard > 0.0, Errc::invalid_argument, "rd: overflow_guard > 0 required");
  for (double p : cfg.norm_exponents)
    require(std::isfinite(p) && p >= 1.0, Errc::invalid_argument,
            "rd: norm exponents must be >= 1");
}

/// Solves (I - theta dt A) x = rhs in place; sub/diag/sup describe A rows.
void thomas_solve(std::vector<double>& diag, std::vector<double>& sub, std::vector<double>& sup,
                  std::vector<double>& rhs) {
  std::size_t m = diag.size();
  for (std::size_t i = 1; i < m; ++i) {
    double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[m - 1] /= diag[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

}  // namespace

std::vector<double> project_cell_averages(const BlockFunction& psi, const Mesh& mesh) {
  psi.validate();
  mesh.validate();
  require(!psi.gen, Errc::invalid_argument,
          "project: generated data must be truncated before projection");
  std::size_t m = mesh.interior();
  std::vector<double> u(mesh.size(), 0.0);
  for (std::size_t i = 1; i <= m; ++i) {
    double a = 0.5 * (mesh.nodes[i - 1] + mesh.nodes[i]);
    double b = 0.5 * (mesh.nodes[i] + mesh.nodes[i + 1]);
    double mass = 0.0;
    for (const auto& blk : psi.blocks) {
      double lo = std::max(a, blk.lo), hi = std::min(b, blk.hi);
      if (hi > lo) mass += blk.value * (hi - lo);
    }
    u[i] = mass / (b - a);
  }
  return u;
}

RdResult rd_solve(const PiecewiseSource& f, const std::vector<double>& u0, const Mesh& mesh,
                  const SolverConfig& cfg) {
  mesh.validate();
  validate_cfg(cfg);
  require(u0.size() == mesh.size(), Errc::invalid_argument,
          "rd: u0 must carry one value per node");

  std::size_t m = mesh.interior();
  const auto& x = mesh.nodes;
  std::vector<double> hl(m), hr(m);  // h_i, h_{i+1} for interior node i
  for (std::size_t i = 0; i < m; ++i) {
    hl[i] = x[i + 1] - x[i];
    hr[i] = x[i + 2] - x[i + 1];
  }

  RdResult out;
  out.mesh = mesh;
  out.u = u0;
  out.u.front() = 0.0;
  out.u.back() = 0.0;

  double lo = f.coverage_lo();
  auto react = [&](double v) {
    if (std::isfinite(lo) && v < lo) {
      ++out.domain_clips;
      v = lo;
    }
    return f.eval(v);
  };

  double rec = cfg.record_dt > 0.0 ? cfg.record_dt : std::max(cfg.horizon / 256.0, cfg.dt);
  out.trace.exponents = cfg.norm_exponents;
  out.trace.norms.assign(cfg.norm_exponents.size(), {});
  auto record = [&](double t) {
    out.trace.t.push_back(t);
    double sup = 0.0;
    for (std::size_t i = 1; i <= m; ++i) sup = std::max(sup, std::fabs(out.u[i]));
    out.trace.sup.push_back(sup);
    for (std::size_t k = 0; k < cfg.norm_exponents.size(); ++k) {
      double p = cfg.norm_exponents[k], s = 0.0;
      for (std::size_t i = 1; i <= m; ++i)
        s += std::pow(std::fabs(out.u[i]), p) * mesh.dual_weight(i);
      out.trace.norms[k].push_back(std::pow(s, 1.0 / p));
    }
  };
  record(0.0);
  double next_rec = rec;

  std::vector<double> diag(m), sub(m), sup_d(m), rhs(m), au(m);
  double t = 0.0;
  while (t < cfg.horizon && out.steps < cfg.max_steps) {
    double dt = std::min(cfg.dt, cfg.horizon - t);

    double peak = 0.0;
    for (std::size_t i = 1; i <= m; ++i) peak = std::max(peak, std::fabs(out.u[i]));
    if (peak >= cfg.overflow_guard) {
      out.overflowed = true;
      out.overflow_time = t;
      break;
    }

    for (std::size_t i = 0; i < m; ++i) {
      double ul = i == 0 ? 0.0 : out.u[i];  // out.u[0] is the boundary
      double uc = out.u[i + 1];
      double ur = out.u[i + 2];
      double lap = (2.0 / (hl[i] + hr[i])) * ((ur - uc) / hr[i] - (uc - ul) / hl[i]);
      au[i] = lap;
      rhs[i] = uc + dt * react(uc) + (1.0 - cfg.theta) * dt * lap;
      double cl = 2.0 / ((hl[i] + hr[i]) * hl[i]);
      double cr = 2.0 / ((hl[i] + hr[i]) * hr[i]);
      sub[i] = -cfg.theta * dt * cl;
      sup_d[i] = -cfg.theta * dt * cr;
      diag[i] = 1.0 + cfg.theta * dt * (cl + cr);
    }
    thomas_solve(diag, sub, sup_d, rhs);
    for (std::size_t i = 0; i < m; ++i) out.u[i + 1] = rhs[i];
    t += dt;
    ++out.steps;

    if (t + 1e-12 >= next_rec || t >= cfg.horizon) {
      record(t);
      while (next_rec <= t + 1e-12) next_rec += rec;
    }
  }
  out.t_end = t;
  return out;
}

RdResult rd_solve_blocks(const PiecewiseSource& f, const BlockFunction& psi,
                         double truncation_M, const Mesh& mesh, const SolverConfig& cfg) {
  BlockFunction data = truncate(psi, truncation_M);
  return rd_solve(f, project_cell_averages(data, mesh), mesh, cfg);
}

SupersolutionReport supersolution_check(const PiecewiseSource& f, const RdResult& r,
                                        double tol) {
  require(!r.trace.t.empty(), Errc::invalid_argument, "supersolution: empty trace");
  SupersolutionReport rep;
  double sup0 = r.trace.sup.front();
  for (std::size_t j = 0; j < r.trace.t.size(); ++j) {
    double tj = r.trace.t[j];
    double env = std::numeric_limits<double>::infinity();
    try {
      FlowResult fr = flow(f, sup0, tj);
      if (fr.status == FlowStatus::Alive) env = fr.value;
    } catch (const Error&) {
      // envelope beyond the float range constrains nothing
    }
    rep.entries.push_back({tj, r.trace.sup[j], env});
    if (std::isfinite(env)) {
      double excess = r.trace.sup[j] - env;
      rep.max_excess = std::max(rep.max_excess, excess);
      if (excess > tol * std::max(1.0, std::fabs(env))) rep.ok = false;
    }
  }
  return rep;
}

LadderReport truncation_ladder(const PiecewiseSource& f, const BlockFunction& psi,
                               const std::vector<double>& levels, const Mesh& mesh,
                               const SolverConfig& cfg, double t0, int jobs) {
  require(!levels.empty(), Errc::invalid_argument, "ladder: at least one level required");
  require(std::is_sorted(levels.begin(), levels.end()), Errc::invalid_argument,
          "ladder: levels must be ascending");
  require(t0 > 0.0 && t0 <= cfg.horizon, Errc::invalid_argument,
          "ladder: t0 in (0, horizon] required");
  SolverConfig c = cfg;
  c.norm_exponents = {2.0};
  if (c.record_dt <= 0.0) c.record_dt = std::max(t0 / 4.0, c.dt);

  std::vector<RdResult> runs(levels.size());
  auto solve_one = [&](std::size_t k) { return rd_solve_blocks(f, psi, levels[k], mesh, c); };
  if (jobs > 1) {
    std::vector<std::future<RdResult>> futs;
    for (std::size_t k = 0; k < levels.size(); ++k)
      futs.push_back(std::async(std::launch::async, solve_one, k));
    for (std::size_t k = 0; k < levels.size(); ++k) runs[k] = futs[k].get();
  } else {
    for (std::size_t k = 0; k < levels.size(); ++k) runs[k] = solve_one(k);
  }

  LadderReport rep;
  rep.t0 = t0;
  rep.horizon = cfg.horizon;
  auto norm_at = [&](const RdResult& r, double tq) {
    const auto& ts = r.trace.t;
    const auto& ns = r.trace.norms[0];
    if (tq <= ts.front()) return ns.front();
    for (std::size_t j = 1; j < ts.size(); ++j)
      if (ts[j] >= tq) {
        double w = (tq - ts[j - 1]) / (ts[j] - ts[j - 1]);
        return ns[j - 1] + w * (ns[j] - ns[j - 1]);
      }
    return ns.back();
  };
  for (std::size_t k = 0; k < levels.size(); ++k) {
    LadderRung rung;
    rung.M = levels[k];
    rung.l2_t0 = norm_at(runs[k], t0);
    rung.l2_end = runs[k].trace.norms[0].back();
    rung.sup_end = runs[k].trace.sup.back();
    for (double n : runs[k].trace.norms[0]) rung.l2_sup = std::max(rung.l2_sup, n);
    rung.overflowed = runs[k].overflowed;
    rep.rungs.push_back(rung);
    if (k > 0 && rung.l2_t0 < rep.rungs[k - 1].l2_t0 * (1.0 - 1e-9))
      rep.norms_nondecreasing = false;
  }
  for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
    double scale = std::max(1.0, runs[k + 1].trace.sup.back());
    for (std::size_t i = 0; i < runs[k].u.size(); ++i) {
      double gap = runs[k].u[i] - runs[k + 1].u[i];
      rep.max_monotonicity_violation = std::max(rep.max_monotonicity_violation, gap);
      if (gap > 1e-6 * scale) rep.nodewise_monotone = false;
    }
  }
  return rep;
}

nlohmann::json LadderReport::to_json() const {
  nlohmann::json j;
  j["t0"] = t0;
  j["horizon"] = horizon;
  j["nodewise_monotone"] = nodewise_monotone;
  j["max_monotonicity_violation"] = max_monotonicity_violation;
  j["norms_nondecreasing"] = norms_nondecreasing;
  j["rungs"] = nlohmann::json::array();
  for (const auto& r : rungs)
    j["rungs"].push_back({{"M", r.M},
                          {"l2_t0", r.l2_t0},
                          {"l2_end", r.l2_end},
                          {"sup_end", r.sup_end},
                          {"l2_sup", r.l2_sup},
                          {"overflowed", r.overflowed}});
  return j;
}

}  // namespace blowup
