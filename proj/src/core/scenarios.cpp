#include "core/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "core/blocks.hpp"
#include "core/canon_io.hpp"
#include "core/conditions.hpp"
#include "core/errors.hpp"
#include "core/kinetics.hpp"
#include "core/mesh.hpp"
#include "core/phi.hpp"
#include "core/quadrature.hpp"
#include "core/rd.hpp"
#include "core/source.hpp"
#include "embedded_defaults.hpp"

namespace blowup {

namespace {

struct CheckList {
  nlohmann::json items = nlohmann::json::array();
  int passed = 0, failed = 0;

  void check(bool ok, const std::string& label, const std::string& detail = "") {
    nlohmann::json it = {{"label", label}, {"ok", ok}};
    if (!detail.empty()) it["detail"] = detail;
    items.push_back(it);
    (ok ? passed : failed)++;
  }
  bool rel_close(double a, double b, double tol, const std::string& label) {
    double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
    bool ok = std::isfinite(a) && std::isfinite(b) && std::fabs(a - b) <= tol * scale;
    std::ostringstream os;
    os << a << " vs " << b;
    check(ok, label, os.str());
    return ok;
  }
};

struct Ctx {
  nlohmann::json cfg;      // scenario section
  nlohmann::json global;   // global section
  std::string out_dir;
  CheckList checks;
  std::vector<std::string> files;

  void emit_json(const std::string& base, const nlohmann::json& j) {
    std::string path = out_dir + "/" + base;
    write_json_file(path, j);
    files.push_back(base);
  }
  void emit_csv(const std::string& base, const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& rows) {
    std::string path = out_dir + "/" + base;
    write_csv(path, header, rows);
    files.push_back(base);
  }
};

// ---- example-a: random explicit block data under u' = u^2 ----------------
//
// Everything here has closed forms: T(v) = 1/v and u(t) = v / (1 - v t), so
// the integrator, the evolver, and the certificates are checked against
// exact arithmetic on randomized inputs.
nlohmann::json scenario_a(Ctx& c) {
  const int samples = c.cfg.at("samples").get<int>();
  const int block_count_max = c.cfg.at("block_count_max").get<int>();
  const double value_max = c.cfg.at("value_max").get<double>();
  const auto t_values = c.cfg.at("t_values").get<std::vector<double>>();
  const auto p_values = c.cfg.at("p_values").get<std::vector<double>>();
  std::mt19937_64 rng(c.global.at("seed").get<uint64_t>());
  std::uniform_real_distribution<double> upos(0.05, 0.95);
  std::uniform_real_distribution<double> uval(0.1, value_max);

  PiecewiseSource f = source_from_spec("s_squared");
  nlohmann::json sample_log = nlohmann::json::array();
  int bad_flow = 0, bad_marked = 0, bad_cert = 0, bad_norm = 0;

  for (int s = 0; s < samples; ++s) {
    int count = 1 + static_cast<int>(rng() % static_cast<uint64_t>(block_count_max));
    std::vector<double> pts;
    for (int i = 0; i < 2 * count; ++i) pts.push_back(upos(rng));
    std::sort(pts.begin(), pts.end());
    BlockFunction psi;
    psi.L = 1.0;
    for (int i = 0; i < count; ++i) {
      double v = uval(rng);
      for (double t : t_values)  // keep values off the blow-up boundary
        if (std::fabs(v * t - 1.0) < 1e-9) v *= 1.0001;
      psi.blocks.push_back({pts[2 * i], pts[2 * i + 1], v});
    }
    psi.validate();

    for (double p : p_values) {
      SeriesVerdict nv = lp_norm_block(psi, p, 8);
      double manual = 0.0;
      for (const auto& b : psi.blocks) manual += std::pow(b.value, p) * (b.hi - b.lo);
      if (!(nv.kind == SeriesKind::Convergent &&
            std::fabs(nv.sum - manual) <= 1e-12 * std::max(1.0, manual)))
        ++bad_norm;
    }

    for (double t : t_values) {
      EvolvedBlocks ev = evolve_block(psi, f, t);
      double marked = 0.0;
      for (std::size_t i = 0; i < psi.blocks.size(); ++i) {
        double v = psi.blocks[i].value;
        const auto& e = ev.entries[i];
        if (v * t < 1.0) {
          double exact = v / (1.0 - v * t);
          if (!(e.fate == BlockFate::Alive &&
                std::fabs(e.value - exact) <= 1e-7 * std::max(1.0, exact)))
            ++bad_flow;
        } else {
          marked += psi.blocks[i].hi - psi.blocks[i].lo;
          if (!(e.fate == BlockFate::BlownUp &&
                std::fabs(e.blowup_time - 1.0 / v) <= 1e-7 * std::max(1.0, 1.0 / v)))
            ++bad_flow;
        }
      }
      if (std::fabs(ev.marked_measure - marked) > 1e-12) ++bad_marked;

      SeriesVerdict cert = instantaneous_blowup_certificate(f, psi, t, 8);
      bool want_divergent = marked > 0.0;
      if ((cert.kind == SeriesKind::Divergent) != want_divergent) ++bad_cert;
      if (cert.kind == SeriesKind::Convergent) {
        double exact_sum = 0.0;
        for (const auto& b : psi.blocks) {
          double u = b.value / (1.0 - b.value * t);
          exact_sum += u * u * (b.hi - b.lo);
        }
        if (std::fabs(cert.sum - exact_sum) > 1e-6 * std::max(1.0, exact_sum)) ++bad_cert;
      }
    }
    if (s < 3) sample_log.push_back(psi.to_json());
  }

  c.checks.check(bad_flow == 0, "evolved values match v/(1 - v t) and 1/v escape times",
                 std::to_string(bad_flow) + " mismatches");
  c.checks.check(bad_marked == 0, "marked measure equals the measure of {v >= 1/t}");
  c.checks.check(bad_cert == 0, "certificates agree with the exact evolution",
                 std::to_string(bad_cert) + " mismatches");
  c.checks.check(bad_norm == 0, "block L^p sums match direct summation");

  nlohmann::json rep;
  rep["samples"] = samples;
  rep["first_samples"] = sample_log;
  rep["checks"] = c.checks.items;
  c.emit_json("a_samples.json", rep);
  return rep;
}

// ---- example-b: escape-time inversion against T(z) = 1/z -----------------
nlohmann::json scenario_b(Ctx& c) {
  const int n_max = c.cfg.at("n_max").get<int>();
  const double t_min = c.cfg.at("t_min").get<double>();
  const double t_max = c.cfg.at("t_max").get<double>();
  const int steps = c.cfg.at("t_steps").get<int>();
  PiecewiseSource f = source_from_spec(c.cfg.at("source").get<std::string>());
  BlockFunction psi = build_example_d_blocks(n_max);

  std::vector<std::vector<double>> rows;
  double worst_invert = 0.0, worst_roundtrip = 0.0;
  bool onset_ok = true;
  for (int k = 0; k < steps; ++k) {
    double t = t_min * std::pow(t_max / t_min, steps == 1 ? 0.0 : double(k) / (steps - 1));
    double M = invert_blowup_time(f, t, 1e-12);
    double exact = 1.0 / t;
    worst_invert = std::max(worst_invert, std::fabs(M - exact) / exact);
    BlowupTimeResult back = blowup_time(f, M, 1e-12);
    worst_roundtrip = std::max(
        worst_roundtrip, back.verdict == BlowupVerdict::Finite
                             ? std::fabs(back.time - t) / t
                             : std::numeric_limits<double>::infinity());

    OnsetMeasure om = blowup_onset_measure(f, psi, t);
    int nstar = 0;
    while (std::exp2(std::exp2(nstar)) < exact * (1.0 - 1e-9)) ++nstar;
    double om_exact = std::exp2(-4.0 * std::exp2(nstar));
    if (!(om.pointwise_blowup && om.measure == om_exact)) onset_ok = false;
    rows.push_back({t, M, exact, om.measure});
  }
  c.checks.check(worst_invert <= 1e-8, "inverted escape times match 1/t",
                 "worst rel err " + std::to_string(worst_invert));
  c.checks.check(worst_roundtrip <= 1e-8, "T(invert(t)) returns t",
                 "worst rel err " + std::to_string(worst_roundtrip));
  c.checks.check(onset_ok, "onset measure telescopes to phi_{n*}^-4 exactly");

  c.emit_csv("b_invert.csv", {"t", "level", "exact_level", "onset_measure"}, rows);
  nlohmann::json rep;
  rep["rows"] = rows.size();
  rep["worst_invert_rel_err"] = worst_invert;
  rep["worst_roundtrip_rel_err"] = worst_roundtrip;
  rep["checks"] = c.checks.items;
  c.emit_json("b_report.json", rep);
  return rep;
}

// ---- example-c: norm inflation without pointwise blow-up -----------------
nlohmann::json scenario_c(Ctx& c) {
  const double p = c.cfg.at("p").get<double>();
  const double r = c.cfg.at("r").get<double>();
  const int t_steps = c.cfg.at("t_steps").get<int>();
  PiecewiseSource f = build_example_c();

  double t_star = std::log(1.0 / (r * p));
  c.checks.rel_close(powerlaw_norm_example_c(r, p, 0.0).blowup_time, t_star, 1e-15,
                     "norm blow-up horizon is log(1/(r p))");

  BlowupTimeResult cls = blowup_time(f, 2.0, 1e-10);
  c.checks.check(cls.verdict == BlowupVerdict::Infinite,
                 "u log u trajectories never escape in finite time");

  // Trajectory cross-check: u(x, t) = x^{-r e^t} exactly.
  double worst_flow = 0.0;
  for (int i = 0; i < 20; ++i) {
    double x = std::pow(10.0, -6.0 + 6.0 * i / 19.0) * 0.9;
    double v0 = std::pow(x, -r);
    for (double t : {0.3, 0.6}) {
      FlowResult fr = flow(f, v0, t);
      double exact = std::pow(v0, std::exp(t));
      worst_flow = std::max(worst_flow, std::fabs(fr.value - exact) / exact);
    }
  }
  c.checks.check(worst_flow <= 1e-7, "flows match x^{-r e^t}",
                 "worst rel err " + std::to_string(worst_flow));

  std::vector<std::vector<double>> rows;
  double worst_quad = 0.0;
  bool monotone = true;
  double prev = 0.0;
  for (int k = 0; k < t_steps; ++k) {
    double t = t_star * 1.05 * double(k) / (t_steps - 1);
    PowerlawNorm n = powerlaw_norm_example_c(r, p, t);
    double s = r * p * std::exp(t);
    double quad = std::numeric_limits<double>::quiet_NaN();
    if (s <= 0.9) {
      const double eps = 1e-12;
      QuadResult q = integrate_adaptive([s](double x) { return std::pow(x, -s); }, eps, 1.0,
                                        1e-9);
      double closed = (1.0 - std::pow(eps, 1.0 - s)) / (1.0 - s);
      worst_quad = std::max(worst_quad, std::fabs(q.value - closed) / closed);
      quad = q.value;
    }
    if (!n.blown && n.value < prev) monotone = false;
    if (!n.blown) prev = n.value;
    rows.push_back({t, n.blown ? std::numeric_limits<double>::infinity() : n.value,
                    n.blown ? 1.0 : 0.0, quad});
  }
  c.checks.check(worst_quad <= 1e-6, "quadrature matches the closed-form norm integral",
                 "worst rel err " + std::to_string(worst_quad));
  c.checks.check(monotone, "the norm grows monotonically up to the horizon");
  c.checks.check(rows.back()[2] == 1.0, "the norm is infinite past log(1/(r p))");

  c.emit_csv("c_norms.csv", {"t", "norm_pp", "blown", "quad_check"}, rows);
  nlohmann::json rep;
  rep["t_star"] = t_star;
  rep["checks"] = c.checks.items;
  c.emit_json("c_report.json", rep);
  return rep;
}

// ---- example-d: tower certificates --------------------------------------
nlohmann::json scenario_d(Ctx& c) {
  const int n_max = c.cfg.at("n_max").get<int>();
  const int n_probe = c.cfg.at("n_probe").get<int>();
  const auto t_values = c.cfg.at("t_values").get<std::vector<double>>();
  PiecewiseSource f = build_example_d(n_max);
  BlockFunction psi = build_example_d_blocks(n_max);

  bool glue_ok = true;
  for (int n = 1; n <= std::min(n_max, phi::kExactMax); ++n)
    glue_ok = glue_ok && phi::collar_continuity_exact(n);
  c.checks.check(glue_ok, "collars glue to the plateaus with zero exact residual");
  c.checks.rel_close(phi::a_n(2), 228.0, 0.0, "a_2");
  c.checks.rel_close(phi::b_n(2), -3522.0, 0.0, "b_2");
  c.checks.rel_close(f.eval(16.0), 126.0, 0.0, "collar midpoint h_2(16)");

  BlowupTimeResult cls = blowup_time(f, 2.0, 1e-10);
  c.checks.check(cls.verdict == BlowupVerdict::Infinite,
                 "tower trajectories never escape in finite time");
  c.checks.check(cls.evidence.uniform_lower_bound >= 0.9,
                 "every tail plateau contributes >= 11/12 to the escape integral");

  SeriesVerdict l2 = lp_norm_block(psi, 2.0, 8);
  c.checks.check(l2.kind == SeriesKind::Convergent && l2.sum < 0.35,
                 "||psi||_2^2 converges", "sum " + std::to_string(l2.sum));
  SeriesVerdict l4 = lp_norm_block(psi, 4.0, 8);
  c.checks.check(l4.kind == SeriesKind::Divergent && l4.c >= 0.5,
                 "||psi||_4^4 diverges with term floor 15/16");

  BlockFunction trunc = truncate(psi, 16.0);
  c.checks.check(trunc.blocks.size() == 3 && !trunc.gen.has_value(),
                 "truncation at 16 collapses the tower to 3 blocks");

  nlohmann::json certs = nlohmann::json::array();
  PiecewiseSource f_sq = source_from_spec("s_squared");
  for (double t : t_values) {
    SeriesVerdict cert = instantaneous_blowup_certificate(f, psi, t, n_probe);
    double t_eff = std::min(t, 0.5);
    c.checks.check(cert.kind == SeriesKind::Divergent, "certificate diverges at t = " +
                                                            std::to_string(t));
    c.checks.rel_close(cert.c, t_eff * t_eff / 8.0, 1e-15,
                       "term floor c = t_eff^2/8 at t = " + std::to_string(t));
    c.checks.check(cert.n0 == 2, "floor starts at level 2");

    OnsetMeasure om = blowup_onset_measure(f_sq, psi, t);
    nlohmann::json row;
    row["t"] = t;
    row["certificate"] = cert.to_json();
    row["onset_under_u2"] = {{"measure", om.measure},
                             {"level", om.level},
                             {"pointwise", om.pointwise_blowup}};
    certs.push_back(row);
  }
  OnsetMeasure om_half = blowup_onset_measure(f_sq, psi, 0.5);
  c.checks.rel_close(om_half.measure, 1.0 / 16.0, 0.0, "onset measure at t = 1/2 is 1/16");

  // The truncated problem stays bounded: certificates turn convergent.
  SeriesVerdict tr_cert = instantaneous_blowup_certificate(f, trunc, 0.5, n_probe);
  c.checks.check(tr_cert.kind == SeriesKind::Convergent,
                 "truncated data keeps a finite L2 norm");

  nlohmann::json rep;
  rep["certificates"] = certs;
  rep["l2"] = l2.to_json();
  rep["l4"] = l4.to_json();
  rep["classification"] = {{"verdict", "infinite"},
                           {"uniform_lower_bound", cls.evidence.uniform_lower_bound}};
  rep["checks"] = c.checks.items;
  c.emit_json("d_certificates.json", rep);
  return rep;
}

// ---- example-e: growth window + truncation ladder ------------------------
nlohmann::json scenario_e(Ctx& c) {
  const double C = c.cfg.at("C").get<double>();
  const auto N_values = c.cfg.at("N_values").get<std::vector<int>>();
  const auto p_grid = c.cfg.at("p_grid").get<std::vector<double>>();
  const auto levels = c.cfg.at("levels").get<std::vector<double>>();
  const int n_max = c.cfg.at("n_max").get<int>();
  const double q = c.cfg.at("q").get<double>();
  PiecewiseSource f = build_example_d(n_max);
  BlockFunction psi = build_example_d_blocks(n_max);

  MinimalGrowthExponent mge = minimal_growth_exponent(f, C, p_grid, n_max);
  c.checks.check(mge.p.has_value() && *mge.p == 3.0,
                 "minimal growth exponent on the grid is 3");
  nlohmann::json growth = nlohmann::json::array();
  for (const auto& rep : mge.reports) growth.push_back(rep.to_json());

  nlohmann::json windows = nlohmann::json::array();
  std::vector<bool> expect = {true, true, false};
  bool window_ok = N_values.size() == expect.size();
  for (std::size_t i = 0; i < N_values.size(); ++i) {
    WellposednessWindow w = wellposedness_window(mge.p.value_or(3.0), N_values[i]);
    bool inside = w.contains(q);
    if (i < expect.size() && inside != expect[i]) window_ok = false;
    nlohmann::json jw = w.to_json();
    jw["q"] = q;
    jw["admissible"] = inside;
    windows.push_back(jw);
  }
  c.checks.check(window_ok, "q = 2 is admissible for N = 1, 2 and not for N = 3");

  SolverConfig cfg;
  cfg.dt = c.cfg.at("dt").get<double>();
  cfg.theta = c.cfg.at("theta").get<double>();
  cfg.horizon = c.cfg.at("horizon").get<double>();
  Mesh mesh = Mesh::graded(1.0, c.cfg.at("finest_cell").get<double>(),
                           c.cfg.at("mesh_ratio").get<double>(), 1.0 / 64.0);
  int jobs = c.global.value("jobs", 1);
  LadderReport ladder = truncation_ladder(f, psi, levels, mesh, cfg,
                                          c.cfg.at("ladder_t0").get<double>(), jobs);
  c.checks.check(ladder.nodewise_monotone, "truncation levels are nodewise ordered",
                 "max violation " + std::to_string(ladder.max_monotonicity_violation));
  c.checks.check(ladder.norms_nondecreasing, "||u_M(t0)||_2 grows with the level");
  bool no_overflow = true;
  for (const auto& r : ladder.rungs) no_overflow = no_overflow && !r.overflowed;
  c.checks.check(no_overflow, "no rung hit the overflow guard");

  RdResult mid = rd_solve_blocks(f, psi, levels.size() > 1 ? levels[1] : levels[0], mesh, cfg);
  SupersolutionReport sup = supersolution_check(f, mid, 1e-6);
  c.checks.check(sup.ok, "sup u stays under the ODE envelope",
                 "max excess " + std::to_string(sup.max_excess));

  std::vector<std::vector<double>> rows;
  for (const auto& r : ladder.rungs)
    rows.push_back({r.M, r.l2_t0, r.l2_end, r.sup_end, r.overflowed ? 1.0 : 0.0});
  c.emit_csv("e_ladder.csv", {"M", "l2_t0", "l2_end", "sup_end", "overflowed"}, rows);

  nlohmann::json rep;
  rep["growth_reports"] = growth;
  rep["minimal_exponent"] = mge.p ? nlohmann::json(*mge.p) : nlohmann::json();
  rep["windows"] = windows;
  rep["ladder"] = ladder.to_json();
  rep["mesh_nodes"] = mesh.nodes.size();
  rep["checks"] = c.checks.items;
  c.emit_json("e_report.json", rep);
  return rep;
}

}  // namespace

nlohmann::json default_config() {
  return nlohmann::json::parse(kEmbeddedDefaultsJson);
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"example-a", "example-b", "example-c",
                                                 "example-d", "example-e"};
  return names;
}

ScenarioResult run_scenario(const std::string& name, const nlohmann::json& overrides,
                            const std::string& out_dir) {
  nlohmann::json config = default_config();
  if (!overrides.is_null()) config.merge_patch(overrides);
  require(config.at("scenarios").contains(name), Errc::invalid_argument,
          "unknown scenario: " + name);

  std::filesystem::create_directories(out_dir);
  Ctx ctx;
  ctx.cfg = config["scenarios"][name];
  ctx.global = config["global"];
  ctx.out_dir = out_dir;

  if (name == "example-a")
    scenario_a(ctx);
  else if (name == "example-b")
    scenario_b(ctx);
  else if (name == "example-c")
    scenario_c(ctx);
  else if (name == "example-d")
    scenario_d(ctx);
  else if (name == "example-e")
    scenario_e(ctx);
  else
    fail(Errc::invalid_argument, "unknown scenario: " + name);

  ScenarioResult res;
  res.name = name;
  res.files = ctx.files;
  res.checks_passed = ctx.checks.passed;
  res.checks_failed = ctx.checks.failed;
  nlohmann::json params = {{"global", ctx.global}, {"scenario", ctx.cfg}};
  res.manifest = {{"name", name},
                  {"params", params},
                  {"param_hash", param_hash(params)},
                  {"files", ctx.files},
                  {"checks", ctx.checks.items},
                  {"passed", ctx.checks.passed},
                  {"failed", ctx.checks.failed}};
  return res;
}

}  // namespace blowup
