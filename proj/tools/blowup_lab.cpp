// blowup-lab: command line front end for the blow-up laboratory.
// Talks to the core exclusively through the C API in blowup/blowup.h.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "blowup/blowup.h"
#include "nlohmann/json.hpp"

using json = nlohmann::json;

namespace {

bool verbose_enabled() {
  const char* v = std::getenv("BLOWUP_LAB_LOG");
  return v != nullptr && *v != '\0';
}

void logv(const std::string& msg) {
  if (verbose_enabled()) std::fprintf(stderr, "[blowup-lab] %s\n", msg.c_str());
}

[[noreturn]] void die(int rc, const std::string& where) {
  const char* err = blowup_last_error();
  std::fprintf(stderr, "error: %s failed (rc=%d): %s\n", where.c_str(), rc,
               err != nullptr ? err : "unknown");
  std::exit(rc == 0 ? 1 : rc);
}

int check(int rc, const std::string& where) {
  if (rc != 0) die(rc, where);
  return rc;
}

// Takes ownership of a string allocated by the library.
std::string adopt(char* s) {
  if (s == nullptr) return {};
  std::string out(s);
  blowup_string_free(s);
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "error: cannot read %s\n", path.c_str());
    std::exit(1);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const json& j, const std::string& format) {
  if (format == "compact") {
    std::printf("%s\n", j.dump().c_str());
  } else {
    std::printf("%s\n", j.dump(2).c_str());
  }
}

json defaults_json() {
  char* s = nullptr;
  check(blowup_default_config(&s), "blowup_default_config");
  return json::parse(adopt(s));
}

// --config FILE layered under command line flags: the file is parsed as a
// JSON object and each present key fills a flag the user did not set.
json load_config_or_empty(const std::string& path) {
  if (path.empty()) return json::object();
  json j = json::parse(slurp(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    std::fprintf(stderr, "error: %s is not a JSON object\n", path.c_str());
    std::exit(1);
  }
  return j;
}

struct SourceOpt {
  std::string spec = "s_squared";

  blowup_source* open() const {
    blowup_source* s = nullptr;
    check(blowup_source_create(spec.c_str(), &s), "blowup_source_create(" + spec + ")");
    return s;
  }
};

struct BlocksOpt {
  std::string spec = "example-d";

  blowup_blocks* open() const {
    blowup_blocks* b = nullptr;
    check(blowup_blocks_create(spec.c_str(), &b), "blowup_blocks_create(" + spec + ")");
    return b;
  }
};

std::vector<double> parse_levels(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

void write_text(const std::string& path, const std::string& body) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::fprintf(stderr, "error: cannot write %s\n", path.c_str());
    std::exit(1);
  }
  out << body;
}

std::string fmt_cell(double v) {
  char buf[64];
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// scenario runner

int run_scenarios(const std::vector<std::string>& names, const std::string& out_dir,
                  const json& overrides, const std::string& format) {
  json combined = json::object();
  combined["scenarios"] = json::array();
  int failed_total = 0;
  for (const auto& name : names) {
    logv("running scenario " + name);
    char* manifest = nullptr;
    const std::string ov = overrides.dump();
    int rc = blowup_run_scenario(name.c_str(), ov.c_str(), out_dir.c_str(), &manifest);
    check(rc, "blowup_run_scenario(" + name + ")");
    json m = json::parse(adopt(manifest));
    const int passed = m.value("passed", 0);
    const int failed = m.value("failed", 0);
    failed_total += failed;
    std::printf("%-10s passed=%d failed=%d files=%zu\n", name.c_str(), passed, failed,
                m.value("files", json::array()).size());
    combined["scenarios"].push_back(std::move(m));
  }
  combined["failed_total"] = failed_total;
  if (names.size() > 1) {
    const std::string path = out_dir + "/manifest.json";
    write_text(path, combined.dump(2) + "\n");
    std::printf("wrote %s\n", path.c_str());
  } else if (format == "json") {
    emit(combined["scenarios"][0], format);
  }
  return failed_total > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blow-up laboratory: reaction kinetics, block data certificates, "
               "and a 1-D reaction-diffusion solver"};
  app.require_subcommand(1);
  app.fallthrough();  // let --format and friends appear after the subcommand
  app.set_version_flag("--version", std::string(blowup_version()));

  json defs = defaults_json();
  const json tool_defs = defs.value("tools", json::object());

  std::string format = defs["global"].value("format", std::string("json"));
  app.add_option("--format", format, "stdout payload format: json or compact")
      ->check(CLI::IsMember({"json", "compact"}));

  int exit_code = 0;

  // ---- scenarios ---------------------------------------------------------
  {
    static const std::vector<std::string> kScenarios = {
        "example-a", "example-b", "example-c", "example-d", "example-e"};
    for (const auto& name : kScenarios) {
      auto* sub = app.add_subcommand(name, "run the " + name + " scenario");
      auto out_dir = std::make_shared<std::string>(defs["global"].value("out_dir", std::string("out")));
      auto config_path = std::make_shared<std::string>();
      auto seed = std::make_shared<long long>(-1);
      auto jobs = std::make_shared<int>(-1);
      sub->add_option("--out-dir", *out_dir, "output directory");
      sub->add_option("--config", *config_path, "JSON override file");
      sub->add_option("--seed", *seed, "RNG seed override");
      sub->add_option("--jobs", *jobs, "worker thread count override");
      sub->callback([&, name, out_dir, config_path, seed, jobs] {
        json ov = load_config_or_empty(*config_path);
        if (*seed >= 0) ov["global"]["seed"] = *seed;
        if (*jobs >= 0) ov["global"]["jobs"] = *jobs;
        exit_code = run_scenarios({name}, *out_dir, ov, format);
      });
    }
    auto* all = app.add_subcommand("all", "run every scenario and write a combined manifest");
    auto out_dir = std::make_shared<std::string>(defs["global"].value("out_dir", std::string("out")));
    auto config_path = std::make_shared<std::string>();
    auto seed = std::make_shared<long long>(-1);
    auto jobs = std::make_shared<int>(-1);
    all->add_option("--out-dir", *out_dir, "output directory");
    all->add_option("--config", *config_path, "JSON override file");
    all->add_option("--seed", *seed, "RNG seed override");
    all->add_option("--jobs", *jobs, "worker thread count override");
    all->callback([&, out_dir, config_path, seed, jobs] {
      json ov = load_config_or_empty(*config_path);
      if (*seed >= 0) ov["global"]["seed"] = *seed;
      if (*jobs >= 0) ov["global"]["jobs"] = *jobs;
      exit_code = run_scenarios({"example-a", "example-b", "example-c", "example-d", "example-e"},
                                *out_dir, ov, format);
    });
  }

  // ---- defaults ----------------------------------------------------------
  {
    auto* sub = app.add_subcommand("defaults", "print the embedded default configuration");
    sub->callback([&] { emit(defs, format); });
  }

  // ---- blowup-time -------------------------------------------------------
  {
    auto* sub = app.add_subcommand("blowup-time",
                                   "classify T(z0) for du/dt = f(u), u(0) = z0");
    auto src = std::make_shared<SourceOpt>();
    auto z0 = std::make_shared<double>(tool_defs.value("blowup-time", json::object()).value("z0", 1.0));
    auto tol = std::make_shared<double>(tool_defs.value("blowup-time", json::object()).value("tol", 1e-10));
    sub->add_option("--source", src->spec, "reaction source spec (name, example-d[:n], @file, or inline JSON)");
    sub->add_option("--z0", *z0, "initial value (must be > 0)");
    sub->add_option("--tol", *tol, "quadrature tolerance");
    sub->callback([&, src, z0, tol] {
      blowup_source* s = src->open();
      char* out = nullptr;
      check(blowup_time_classify(s, *z0, *tol, &out), "blowup_time_classify");
      emit(json::parse(adopt(out)), format);
      blowup_source_destroy(s);
    });
  }

  // ---- classify ----------------------------------------------------------
  {
    auto* sub = app.add_subcommand("classify",
                                   "blow-up / no-blow-up verdict for a source (probe from z0 = 1)");
    auto src = std::make_shared<SourceOpt>();
    auto tol = std::make_shared<double>(tool_defs.value("classify", json::object()).value("tol", 1e-10));
    sub->add_option("--source", src->spec, "reaction source spec");
    sub->add_option("--tol", *tol, "quadrature tolerance");
    sub->callback([&, src, tol] {
      blowup_source* s = src->open();
      char* out = nullptr;
      check(blowup_time_classify(s, 1.0, *tol, &out), "blowup_time_classify");
      json j = json::parse(adopt(out));
      double lip_bound = 0.0;
      int has_lip = 0;
      check(blowup_uniform_lipschitz(s, &lip_bound, &has_lip), "blowup_uniform_lipschitz");
      j["uniform_lipschitz"] = has_lip ? json(lip_bound) : json();
      emit(j, format);
      blowup_source_destroy(s);
    });
  }

  // ---- invert ------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("invert", "smallest level M >= 1 with blow-up time T(M) <= t");
    auto src = std::make_shared<SourceOpt>();
    auto t = std::make_shared<double>(0.5);
    auto tol = std::make_shared<double>(1e-10);
    sub->add_option("--source", src->spec, "reaction source spec");
    sub->add_option("--t", *t, "target blow-up time")->required();
    sub->add_option("--tol", *tol, "quadrature tolerance");
    sub->callback([&, src, t, tol] {
      blowup_source* s = src->open();
      double level = 0.0;
      check(blowup_invert_time(s, *t, *tol, &level), "blowup_invert_time");
      emit(json{{"t", *t}, {"level", level}}, format);
      blowup_source_destroy(s);
    });
  }

  // ---- growth-check ------------------------------------------------------
  {
    auto* sub = app.add_subcommand("growth-check",
                                   "pointwise growth condition |f'(u)| <= C(1+2|u|^(p-1))");
    auto src = std::make_shared<SourceOpt>();
    const json gdef = tool_defs.value("growth-check", json::object());
    auto p = std::make_shared<double>(gdef.value("p", 3.0));
    auto C = std::make_shared<double>(gdef.value("C", 1.0));
    auto n_max = std::make_shared<int>(gdef.value("n_max", 8));
    auto grid = std::make_shared<std::string>();
    sub->add_option("--source", src->spec, "reaction source spec");
    sub->add_option("--p", *p, "growth exponent");
    sub->add_option("--C", *C, "growth constant");
    sub->add_option("--n-max", *n_max, "tower levels to check explicitly");
    sub->add_option("--grid", *grid, "comma-separated exponents: report the minimal one that holds");
    sub->callback([&, src, p, C, n_max, grid] {
      blowup_source* s = src->open();
      char* out = nullptr;
      if (!grid->empty()) {
        std::vector<double> g = parse_levels(*grid);
        check(blowup_minimal_growth(s, *C, g.data(), static_cast<int>(g.size()), *n_max, &out),
              "blowup_minimal_growth");
      } else {
        check(blowup_growth_check(s, *p, *C, *n_max, &out), "blowup_growth_check");
      }
      json j = json::parse(adopt(out));
      emit(j, format);
      if (grid->empty() && !j.value("holds", false)) exit_code = 1;
      blowup_source_destroy(s);
    });
  }

  // ---- wellposedness -----------------------------------------------------
  {
    auto* sub = app.add_subcommand("wellposedness",
                                   "local well-posedness window for L^q data in dimension N");
    auto p = std::make_shared<double>(3.0);
    auto N = std::make_shared<int>(1);
    auto q = std::make_shared<double>(2.0);
    sub->add_option("--p", *p, "nonlinearity exponent");
    sub->add_option("--N", *N, "space dimension");
    sub->add_option("--q", *q, "data integrability exponent");
    sub->callback([&, p, N, q] {
      char* out = nullptr;
      check(blowup_wellposedness_window(*p, *N, *q, &out), "blowup_wellposedness_window");
      emit(json::parse(adopt(out)), format);
    });
  }

  // ---- lp-norm -----------------------------------------------------------
  {
    auto* sub = app.add_subcommand("lp-norm", "L^p norm certificate for block data");
    auto blk = std::make_shared<BlocksOpt>();
    auto p = std::make_shared<double>(2.0);
    auto n_terms = std::make_shared<int>(0);
    sub->add_option("--data", blk->spec, "block data spec (example-d[:n], @file, or inline JSON)");
    sub->add_option("--p", *p, "norm exponent");
    sub->add_option("--n-terms", *n_terms, "series terms to record (0 = automatic)");
    sub->callback([&, blk, p, n_terms] {
      blowup_blocks* b = blk->open();
      char* out = nullptr;
      check(blowup_lp_norm(b, *p, *n_terms, &out), "blowup_lp_norm");
      emit(json::parse(adopt(out)), format);
      blowup_blocks_destroy(b);
    });
  }

  // ---- certificate -------------------------------------------------------
  {
    auto* sub = app.add_subcommand("certificate",
                                   "instantaneous L^2 blow-up certificate for evolved block data");
    auto src = std::make_shared<SourceOpt>();
    auto blk = std::make_shared<BlocksOpt>();
    auto t = std::make_shared<double>(0.1);
    auto n_probe = std::make_shared<int>(20);
    sub->add_option("--source", src->spec, "reaction source spec");
    sub->add_option("--data", blk->spec, "block data spec");
    sub->add_option("--t", *t, "evolution time");
    sub->add_option("--n-probe", *n_probe, "tower levels to tabulate in the certificate");
    sub->callback([&, src, blk, t, n_probe] {
      blowup_source* s = src->open();
      blowup_blocks* b = blk->open();
      char* out = nullptr;
      check(blowup_certificate(s, b, *t, *n_probe, &out), "blowup_certificate");
      emit(json::parse(adopt(out)), format);
      blowup_blocks_destroy(b);
      blowup_source_destroy(s);
    });
  }

  // ---- onset -------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("onset",
                                   "measure of the set that has blown up pointwise by time t");
    auto src = std::make_shared<SourceOpt>();
    auto blk = std::make_shared<BlocksOpt>();
    auto t = std::make_shared<double>(0.5);
    auto tol = std::make_shared<double>(1e-12);
    sub->add_option("--source", src->spec, "reaction source spec");
    sub->add_option("--data", blk->spec, "block data spec");
    sub->add_option("--t", *t, "time");
    sub->add_option("--tol", *tol, "inversion tolerance");
    sub->callback([&, src, blk, t, tol] {
      blowup_source* s = src->open();
      blowup_blocks* b = blk->open();
      char* out = nullptr;
      check(blowup_onset_measure(s, b, *t, *tol, &out), "blowup_onset_measure");
      emit(json::parse(adopt(out)), format);
      blowup_blocks_destroy(b);
      blowup_source_destroy(s);
    });
  }

  // ---- truncate ----------------------------------------------------------
  {
    auto* sub = app.add_subcommand("truncate", "clip block data at a plateau level M");
    auto blk = std::make_shared<BlocksOpt>();
    auto M = std::make_shared<double>(16.0);
    sub->add_option("--data", blk->spec, "block data spec");
    sub->add_option("--M", *M, "truncation level");
    sub->callback([&, blk, M] {
      blowup_blocks* b = blk->open();
      blowup_blocks* cut = nullptr;
      check(blowup_blocks_truncate(b, *M, &cut), "blowup_blocks_truncate");
      char* out = nullptr;
      check(blowup_blocks_to_json(cut, &out), "blowup_blocks_to_json");
      emit(json::parse(adopt(out)), format);
      blowup_blocks_destroy(cut);
      blowup_blocks_destroy(b);
    });
  }

  // ---- rd-run ------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("rd-run",
                                   "IMEX reaction-diffusion run on truncated block data");
    const json rdef = tool_defs.value("rd-run", json::object());
    auto src = std::make_shared<SourceOpt>();
    auto blk = std::make_shared<BlocksOpt>();
    auto truncation = std::make_shared<double>(rdef.value("truncation", 16.0));
    auto dt = std::make_shared<double>(rdef.value("dt", 1e-4));
    auto theta = std::make_shared<double>(rdef.value("theta", 0.5));
    auto horizon = std::make_shared<double>(rdef.value("horizon", 0.1));
    auto finest = std::make_shared<double>(rdef.value("finest_cell", std::ldexp(1.0, -36)));
    auto ratio = std::make_shared<double>(rdef.value("mesh_ratio", 0.7));
    auto cells = std::make_shared<int>(0);
    auto supersolution = std::make_shared<bool>(false);
    auto out_dir = std::make_shared<std::string>();
    sub->add_option("--source", src->spec, "reaction source spec");
    sub->add_option("--data", blk->spec, "block data spec");
    sub->add_option("--truncation", *truncation, "plateau level M for the initial data");
    sub->add_option("--dt", *dt, "time step");
    sub->add_option("--theta", *theta, "implicit weight for diffusion (0.5 = CN, 1 = backward Euler)");
    sub->add_option("--horizon", *horizon, "final time");
    sub->add_option("--finest-cell", *finest, "smallest graded cell near x = 0");
    sub->add_option("--mesh-ratio", *ratio, "geometric coarsening ratio in (0,1)");
    sub->add_option("--cells", *cells, "use a uniform mesh with this many cells instead of grading");
    sub->add_flag("--supersolution", *supersolution, "check the trace against the kinetic envelope");
    sub->add_option("--out-dir", *out_dir, "write trace CSV and report JSON here");
    sub->callback([&, src, blk, truncation, dt, theta, horizon, finest, ratio, cells,
                   supersolution, out_dir] {
      blowup_source* s = src->open();
      blowup_blocks* b = blk->open();
      blowup_mesh* mesh = nullptr;
      if (*cells > 0) {
        check(blowup_mesh_uniform(1.0, *cells, &mesh), "blowup_mesh_uniform");
      } else {
        check(blowup_mesh_graded(1.0, *finest, *ratio, 1.0 / 64.0, &mesh), "blowup_mesh_graded");
      }
      json cfg = {{"dt", *dt},
                  {"theta", *theta},
                  {"horizon", *horizon},
                  {"truncation", *truncation},
                  {"norm_exponents", json::array({1.0, 2.0})},
                  {"supersolution", *supersolution}};
      const std::string cfg_s = cfg.dump();
      char* out = nullptr;
      logv("rd-run starting");
      check(blowup_rd_solve(s, b, mesh, cfg_s.c_str(), &out), "blowup_rd_solve");
      json j = json::parse(adopt(out));
      if (!out_dir->empty()) {
        const json& trace = j["trace"];
        std::ostringstream csv;
        csv << "t";
        for (const auto& [name, col] : trace["norms"].items()) csv << "," << name;
        csv << ",sup\n";
        const auto& ts = trace["t"];
        for (size_t i = 0; i < ts.size(); ++i) {
          csv << fmt_cell(ts[i].get<double>());
          for (const auto& [name, col] : trace["norms"].items())
            csv << "," << fmt_cell(col[i].get<double>());
          csv << "," << fmt_cell(trace["sup"][i].get<double>()) << "\n";
        }
        write_text(*out_dir + "/rd_trace.csv", csv.str());
        json report = j;
        report.erase("trace");  // the CSV carries the trace
        write_text(*out_dir + "/rd_report.json", report.dump(2) + "\n");
        std::printf("wrote %s and %s\n", (*out_dir + "/rd_trace.csv").c_str(),
                    (*out_dir + "/rd_report.json").c_str());
      } else {
        emit(j, format);
      }
      if (j.value("overflowed", false)) exit_code = 2;
      if (*supersolution && j.contains("supersolution") &&
          !j["supersolution"].value("ok", true)) {
        exit_code = 1;
      }
      blowup_mesh_destroy(mesh);
      blowup_blocks_destroy(b);
      blowup_source_destroy(s);
    });
  }

  // ---- ladder ------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("ladder",
                                   "truncation ladder: RD runs at increasing plateau levels");
    auto src = std::make_shared<SourceOpt>();
    auto blk = std::make_shared<BlocksOpt>();
    auto levels = std::make_shared<std::string>("4,16,256");
    auto dt = std::make_shared<double>(1e-5);
    auto theta = std::make_shared<double>(1.0);
    auto horizon = std::make_shared<double>(0.5);
    auto t0 = std::make_shared<double>(0.01);
    auto finest = std::make_shared<double>(std::ldexp(1.0, -36));
    auto ratio = std::make_shared<double>(0.7);
    auto jobs = std::make_shared<int>(1);
    sub->add_option("--source", src->spec, "reaction source spec");
    sub->add_option("--data", blk->spec, "block data spec");
    sub->add_option("--levels", *levels, "comma-separated truncation levels");
    sub->add_option("--dt", *dt, "time step");
    sub->add_option("--theta", *theta, "implicit weight for diffusion");
    sub->add_option("--horizon", *horizon, "final time");
    sub->add_option("--t0", *t0, "early comparison time");
    sub->add_option("--finest-cell", *finest, "smallest graded cell near x = 0");
    sub->add_option("--mesh-ratio", *ratio, "geometric coarsening ratio in (0,1)");
    sub->add_option("--jobs", *jobs, "parallel rungs");
    sub->callback([&, src, blk, levels, dt, theta, horizon, t0, finest, ratio, jobs] {
      blowup_source* s = src->open();
      blowup_blocks* b = blk->open();
      blowup_mesh* mesh = nullptr;
      check(blowup_mesh_graded(1.0, *finest, *ratio, 1.0 / 64.0, &mesh), "blowup_mesh_graded");
      std::vector<double> lv = parse_levels(*levels);
      json cfg = {{"dt", *dt},
                  {"theta", *theta},
                  {"horizon", *horizon},
                  {"levels", lv},
                  {"t0", *t0},
                  {"jobs", *jobs}};
      const std::string cfg_s = cfg.dump();
      char* out = nullptr;
      logv("ladder starting");
      check(blowup_rd_ladder(s, b, mesh, cfg_s.c_str(), &out), "blowup_rd_ladder");
      json j = json::parse(adopt(out));
      emit(j, format);
      if (!j.value("monotone", true) || !j.value("norms_nondecreasing", true)) exit_code = 1;
      blowup_mesh_destroy(mesh);
      blowup_blocks_destroy(b);
      blowup_source_destroy(s);
    });
  }

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}
