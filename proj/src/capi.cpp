#include "blowup/blowup.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "core/blocks.hpp"
#include "core/conditions.hpp"
#include "core/errors.hpp"
#include "core/kinetics.hpp"
#include "core/mesh.hpp"
#include "core/rd.hpp"
#include "core/scenarios.hpp"
#include "core/source.hpp"

struct blowup_source {
  blowup::PiecewiseSource impl;
};
struct blowup_blocks {
  blowup::BlockFunction impl;
};
struct blowup_mesh {
  blowup::Mesh impl;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

template <class Fn>
int guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return 0;
  } catch (const blowup::Error& e) {
    g_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BLOWUP_ERR_EXCEPTION;
  } catch (...) {
    g_last_error = "unknown error";
    return BLOWUP_ERR_UNKNOWN;
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) return nullptr;
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void out_json_string(const json& j, char** out) {
  blowup::require(out != nullptr, blowup::Errc::invalid_argument, "null output pointer");
  *out = dup_string(j.dump(2));
  blowup::require(*out != nullptr, blowup::Errc::internal, "out of memory");
}

json number_or_null(double v) {
  return std::isfinite(v) ? json(v) : json();
}

json flow_to_json(const blowup::FlowResult& r) {
  return {{"status", r.status == blowup::FlowStatus::Alive ? "alive" : "blown_up"},
          {"value", number_or_null(r.value)},
          {"blowup_time", r.blowup_time},
          {"t", r.t},
          {"pieces_traversed", r.pieces_traversed},
          {"err", r.err}};
}

const char* verdict_name(blowup::BlowupVerdict v) {
  switch (v) {
    case blowup::BlowupVerdict::Finite:
      return "finite";
    case blowup::BlowupVerdict::Infinite:
      return "infinite";
    case blowup::BlowupVerdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

json classify_to_json(const blowup::BlowupTimeResult& r) {
  json segs = json::array();
  for (const auto& s : r.evidence.segments)
    segs.push_back({{"label", s.label},
                    {"lo", number_or_null(s.lo)},
                    {"hi", number_or_null(s.hi)},
                    {"contribution", s.contribution},
                    {"partial_sum", s.partial_sum}});
  return {{"verdict", verdict_name(r.verdict)},
          {"time", number_or_null(r.time)},
          {"err", r.err},
          {"lower_bound", r.lower_bound},
          {"evidence",
           {{"basis", r.evidence.basis},
            {"uniform_lower_bound", r.evidence.uniform_lower_bound},
            {"segments", segs}}}};
}

const char* fate_name(blowup::BlockFate f) {
  switch (f) {
    case blowup::BlockFate::Alive:
      return "alive";
    case blowup::BlockFate::BlownUp:
      return "blown_up";
    case blowup::BlockFate::OutOfRange:
      return "out_of_range";
  }
  return "?";
}

json entry_to_json(const blowup::EvolvedBlocks::Entry& e) {
  return {{"lo", e.lo},
          {"hi", e.hi},
          {"fate", fate_name(e.fate)},
          {"value", number_or_null(e.value)},
          {"blowup_time", e.blowup_time}};
}

json evolved_to_json(const blowup::EvolvedBlocks& e) {
  json entries = json::array();
  for (const auto& en : e.entries) entries.push_back(entry_to_json(en));
  return {{"entries", entries},
          {"ambient", entry_to_json(e.ambient)},
          {"ambient_measure", e.ambient_measure},
          {"t", e.t},
          {"marked_measure", e.marked_measure},
          {"L", e.L}};
}

json trace_to_json(const blowup::NormTrace& tr) {
  json norms = json::object();
  for (std::size_t k = 0; k < tr.exponents.size(); ++k) {
    char key[32];
    std::snprintf(key, sizeof key, "L%g", tr.exponents[k]);
    norms[key] = tr.norms[k];
  }
  return {{"t", tr.t}, {"norms", norms}, {"sup", tr.sup}};
}

json rd_to_json(const blowup::RdResult& r) {
  return {{"t_end", r.t_end},
          {"steps", r.steps},
          {"overflowed", r.overflowed},
          {"overflow_time", r.overflow_time},
          {"domain_clips", r.domain_clips},
          {"sup_end", r.trace.sup.empty() ? 0.0 : r.trace.sup.back()},
          {"nodes", r.mesh.nodes.size()},
          {"trace", trace_to_json(r.trace)}};
}

blowup::SolverConfig solver_config_from_json(const json& j) {
  blowup::SolverConfig cfg;
  if (j.contains("dt")) cfg.dt = j["dt"].get<double>();
  if (j.contains("theta")) cfg.theta = j["theta"].get<double>();
  if (j.contains("horizon")) cfg.horizon = j["horizon"].get<double>();
  if (j.contains("norm_exponents"))
    cfg.norm_exponents = j["norm_exponents"].get<std::vector<double>>();
  if (j.contains("record_dt")) cfg.record_dt = j["record_dt"].get<double>();
  if (j.contains("overflow_guard")) cfg.overflow_guard = j["overflow_guard"].get<double>();
  if (j.contains("max_steps")) cfg.max_steps = j["max_steps"].get<long>();
  return cfg;
}

json parse_config(const char* config_json) {
  if (!config_json || !*config_json) return json::object();
  try {
    return json::parse(config_json);
  } catch (const json::exception& e) {
    blowup::fail(blowup::Errc::json, std::string("config: ") + e.what());
  }
}

}  // namespace

extern "C" {

const char* blowup_version(void) { return "0.3.0"; }

const char* blowup_last_error(void) { return g_last_error.c_str(); }

void blowup_string_free(char* s) { std::free(s); }

int blowup_source_create(const char* spec, blowup_source** out) {
  return guarded([&] {
    blowup::require(spec && out, blowup::Errc::invalid_argument, "null argument");
    *out = new blowup_source{blowup::source_from_spec(spec)};
  });
}

void blowup_source_destroy(blowup_source* s) { delete s; }

int blowup_source_to_json(const blowup_source* s, char** out_json) {
  return guarded([&] {
    blowup::require(s, blowup::Errc::invalid_argument, "null source");
    out_json_string(s->impl.to_json(), out_json);
  });
}

int blowup_source_eval(const blowup_source* s, double x, double* out) {
  return guarded([&] {
    blowup::require(s && out, blowup::Errc::invalid_argument, "null argument");
    *out = s->impl.eval(x);
  });
}

int blowup_source_lipschitz(const blowup_source* s, double lo, double hi, double* bound,
                            int* has_jump) {
  return guarded([&] {
    blowup::require(s && bound && has_jump, blowup::Errc::invalid_argument, "null argument");
    auto rep = s->impl.lipschitz_on(lo, hi);
    *bound = rep.bound;
    *has_jump = rep.has_jump ? 1 : 0;
  });
}

int blowup_reciprocal_integral(const blowup_source* s, double a, double b, double tol,
                               double* value, double* err) {
  return guarded([&] {
    blowup::require(s && value && err, blowup::Errc::invalid_argument, "null argument");
    auto r = blowup::reciprocal_integral(s->impl, a, b, tol);
    *value = r.value;
    *err = r.err;
  });
}

int blowup_flow(const blowup_source* s, double z0, double t, char** out_json) {
  return guarded([&] {
    blowup::require(s, blowup::Errc::invalid_argument, "null source");
    out_json_string(flow_to_json(blowup::flow(s->impl, z0, t)), out_json);
  });
}

int blowup_time_classify(const blowup_source* s, double z0, double tol, char** out_json) {
  return guarded([&] {
    blowup::require(s, blowup::Errc::invalid_argument, "null source");
    out_json_string(classify_to_json(blowup::blowup_time(s->impl, z0, tol)), out_json);
  });
}

int blowup_invert_time(const blowup_source* s, double eps, double tol, double* out_level) {
  return guarded([&] {
    blowup::require(s && out_level, blowup::Errc::invalid_argument, "null argument");
    *out_level = blowup::invert_blowup_time(s->impl, eps, tol);
  });
}

int blowup_envelope(const blowup_source* s, double x0, double y0, double z0,
                    const double* grid, int n, char** out_json) {
  return guarded([&] {
    blowup::require(s && grid && n > 0, blowup::Errc::invalid_argument, "null argument");
    std::vector<double> g(grid, grid + n);
    auto rep = blowup::comparison_envelope(s->impl, x0, y0, z0, g);
    json entries = json::array();
    for (const auto& e : rep.entries)
      entries.push_back({{"t", e.t}, {"x", e.x}, {"y", e.y}, {"z", e.z}});
    json j = {{"entries", entries}, {"max_violation", rep.max_violation}};
    j["truncated_at"] = rep.truncated_at ? json(*rep.truncated_at) : json();
    out_json_string(j, out_json);
  });
}

int blowup_blocks_create(const char* spec, blowup_blocks** out) {
  return guarded([&] {
    blowup::require(spec && out, blowup::Errc::invalid_argument, "null argument");
    *out = new blowup_blocks{blowup::blocks_from_spec(spec)};
  });
}

void blowup_blocks_destroy(blowup_blocks* b) { delete b; }

int blowup_blocks_to_json(const blowup_blocks* b, char** out_json) {
  return guarded([&] {
    blowup::require(b, blowup::Errc::invalid_argument, "null blocks");
    out_json_string(b->impl.to_json(), out_json);
  });
}

int blowup_blocks_truncate(const blowup_blocks* b, double M, blowup_blocks** out) {
  return guarded([&] {
    blowup::require(b && out, blowup::Errc::invalid_argument, "null argument");
    *out = new blowup_blocks{blowup::truncate(b->impl, M)};
  });
}

int blowup_lp_norm(const blowup_blocks* b, double p, int n_terms, char** out_json) {
  return guarded([&] {
    blowup::require(b, blowup::Errc::invalid_argument, "null blocks");
    out_json_string(blowup::lp_norm_block(b->impl, p, n_terms).to_json(), out_json);
  });
}

int blowup_evolve(const blowup_source* s, const blowup_blocks* b, double t, char** out_json) {
  return guarded([&] {
    blowup::require(s && b, blowup::Errc::invalid_argument, "null argument");
    out_json_string(evolved_to_json(blowup::evolve_block(b->impl, s->impl, t)), out_json);
  });
}

int blowup_certificate(const blowup_source* s, const blowup_blocks* b, double t, int n_probe,
                       char** out_json) {
  return guarded([&] {
    blowup::require(s && b, blowup::Errc::invalid_argument, "null argument");
    out_json_string(
        blowup::instantaneous_blowup_certificate(s->impl, b->impl, t, n_probe).to_json(),
        out_json);
  });
}

int blowup_onset_measure(const blowup_source* s, const blowup_blocks* b, double t, double tol,
                         char** out_json) {
  return guarded([&] {
    blowup::require(s && b, blowup::Errc::invalid_argument, "null argument");
    auto om = blowup::blowup_onset_measure(s->impl, b->impl, t, tol);
    out_json_string({{"measure", om.measure},
                     {"pointwise_blowup", om.pointwise_blowup},
                     {"level", number_or_null(om.level)}},
                    out_json);
  });
}

int blowup_powerlaw_norm(double r, double p, double t, char** out_json) {
  return guarded([&] {
    auto n = blowup::powerlaw_norm_example_c(r, p, t);
    out_json_string({{"blown", n.blown},
                     {"value", number_or_null(n.value)},
                     {"blowup_time", n.blowup_time}},
                    out_json);
  });
}

int blowup_growth_check(const blowup_source* s, double p, double C, int n_max,
                        char** out_json) {
  return guarded([&] {
    blowup::require(s, blowup::Errc::invalid_argument, "null source");
    out_json_string(blowup::growth_condition_check(s->impl, p, C, n_max).to_json(), out_json);
  });
}

int blowup_minimal_growth(const blowup_source* s, double C, const double* p_grid, int n,
                          int n_max, char** out_json) {
  return guarded([&] {
    blowup::require(s && p_grid && n > 0, blowup::Errc::invalid_argument, "null argument");
    std::vector<double> grid(p_grid, p_grid + n);
    auto mge = blowup::minimal_growth_exponent(s->impl, C, grid, n_max);
    json reports = json::array();
    for (const auto& r : mge.reports) reports.push_back(r.to_json());
    json j = {{"reports", reports}};
    j["p"] = mge.p ? json(*mge.p) : json();
    out_json_string(j, out_json);
  });
}

int blowup_wellposedness_window(double p, int N, double q, char** out_json) {
  return guarded([&] {
    auto w = blowup::wellposedness_window(p, N);
    nlohmann::json j = w.to_json();
    j["q"] = q;
    j["contains_q"] = w.contains(q);
    out_json_string(j, out_json);
  });
}

int blowup_uniform_lipschitz(const blowup_source* s, double* bound, int* has_bound) {
  return guarded([&] {
    blowup::require(s && bound && has_bound, blowup::Errc::invalid_argument, "null argument");
    auto b = blowup::uniform_lipschitz_bound(s->impl);
    *has_bound = b ? 1 : 0;
    *bound = b.value_or(0.0);
  });
}

int blowup_mesh_uniform(double L, int cells, blowup_mesh** out) {
  return guarded([&] {
    blowup::require(out, blowup::Errc::invalid_argument, "null output");
    *out = new blowup_mesh{blowup::Mesh::uniform(L, cells)};
  });
}

int blowup_mesh_graded(double L, double finest, double ratio, double cap, blowup_mesh** out) {
  return guarded([&] {
    blowup::require(out, blowup::Errc::invalid_argument, "null output");
    *out = new blowup_mesh{blowup::Mesh::graded(L, finest, ratio, cap)};
  });
}

void blowup_mesh_destroy(blowup_mesh* m) { delete m; }

int blowup_mesh_to_json(const blowup_mesh* m, char** out_json) {
  return guarded([&] {
    blowup::require(m, blowup::Errc::invalid_argument, "null mesh");
    out_json_string(m->impl.to_json(), out_json);
  });
}

int blowup_rd_solve(const blowup_source* s, const blowup_blocks* b, const blowup_mesh* m,
                    const char* config_json, char** out_json) {
  return guarded([&] {
    blowup::require(s && b && m, blowup::Errc::invalid_argument, "null argument");
    json cfg_j = parse_config(config_json);
    blowup::SolverConfig cfg = solver_config_from_json(cfg_j);
    double M = cfg_j.value("truncation", 16.0);
    blowup::RdResult r = blowup::rd_solve_blocks(s->impl, b->impl, M, m->impl, cfg);
    json j = rd_to_json(r);
    if (cfg_j.value("supersolution", false)) {
      auto rep = blowup::supersolution_check(s->impl, r);
      json entries = json::array();
      for (const auto& e : rep.entries)
        entries.push_back(
            {{"t", e.t}, {"sup", e.sup}, {"envelope", number_or_null(e.envelope)}});
      j["supersolution"] = {
          {"ok", rep.ok}, {"max_excess", rep.max_excess}, {"entries", entries}};
    }
    out_json_string(j, out_json);
  });
}

int blowup_rd_ladder(const blowup_source* s, const blowup_blocks* b, const blowup_mesh* m,
                     const char* config_json, char** out_json) {
  return guarded([&] {
    blowup::require(s && b && m, blowup::Errc::invalid_argument, "null argument");
    json cfg_j = parse_config(config_json);
    blowup::SolverConfig cfg = solver_config_from_json(cfg_j);
    std::vector<double> levels =
        cfg_j.value("levels", std::vector<double>{4.0, 16.0, 256.0});
    double t0 = cfg_j.value("t0", cfg.horizon / 10.0);
    int jobs = cfg_j.value("jobs", 1);
    auto rep = blowup::truncation_ladder(s->impl, b->impl, levels, m->impl, cfg, t0, jobs);
    out_json_string(rep.to_json(), out_json);
  });
}

int blowup_run_scenario(const char* name, const char* overrides_json, const char* out_dir,
                        char** out_manifest_json) {
  return guarded([&] {
    blowup::require(name && out_dir, blowup::Errc::invalid_argument, "null argument");
    json overrides = parse_config(overrides_json);
    auto res = blowup::run_scenario(name, overrides, out_dir);
    out_json_string(res.manifest, out_manifest_json);
  });
}

int blowup_default_config(char** out_json) {
  return guarded([&] { out_json_string(blowup::default_config(), out_json); });
}

}  // extern "C"
