// Exercises the C ABI the way an external binding would: only blowup/blowup.h,
// no core headers, everything through JSON strings and error codes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <string>

#include "blowup/blowup.h"
#include "doctest.h"
#include "nlohmann/json.hpp"

using json = nlohmann::json;

namespace {

std::string take(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  blowup_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("version string is present") {
  const char* v = blowup_version();
  REQUIRE(v != nullptr);
  CHECK(std::strlen(v) >= 5);
}

TEST_CASE("source lifecycle, eval, and flow") {
  blowup_source* s = nullptr;
  REQUIRE(blowup_source_create("s_squared", &s) == 0);
  REQUIRE(s != nullptr);

  double val = 0.0;
  CHECK(blowup_source_eval(s, 3.0, &val) == 0);
  CHECK(val == 9.0);

  char* out = nullptr;
  REQUIRE(blowup_flow(s, 1.0, 0.5, &out) == 0);
  json j = json::parse(take(out));
  CHECK(j["status"] == "alive");
  CHECK(j["value"].get<double>() == doctest::Approx(2.0).epsilon(1e-8));

  REQUIRE(blowup_flow(s, 4.0, 0.5, &out) == 0);
  json jb = json::parse(take(out));
  CHECK(jb["status"] == "blown_up");
  CHECK(jb["blowup_time"].get<double>() == doctest::Approx(0.25).epsilon(1e-8));

  blowup_source_destroy(s);
}

TEST_CASE("classification and inversion through the ABI") {
  blowup_source* s = nullptr;
  REQUIRE(blowup_source_create("s_squared", &s) == 0);
  char* out = nullptr;
  REQUIRE(blowup_time_classify(s, 1.0, 1e-10, &out) == 0);
  json j = json::parse(take(out));
  CHECK(j["verdict"] == "finite");
  CHECK(j["time"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));

  double level = 0.0;
  REQUIRE(blowup_invert_time(s, 0.5, 1e-10, &level) == 0);
  CHECK(level == doctest::Approx(2.0).epsilon(1e-9));
  blowup_source_destroy(s);

  blowup_source* fd = nullptr;
  REQUIRE(blowup_source_create("example-d:8", &fd) == 0);
  REQUIRE(blowup_time_classify(fd, 1.0, 1e-10, &out) == 0);
  json jd = json::parse(take(out));
  CHECK(jd["verdict"] == "infinite");
  CHECK(jd["evidence"]["uniform_lower_bound"].get<double>() >= 0.9);
  blowup_source_destroy(fd);
}

TEST_CASE("block data certificates through the ABI") {
  blowup_blocks* b = nullptr;
  REQUIRE(blowup_blocks_create("example-d", &b) == 0);
  char* out = nullptr;

  REQUIRE(blowup_lp_norm(b, 2.0, 4, &out) == 0);
  json l2 = json::parse(take(out));
  CHECK(l2["kind"] == "convergent");
  CHECK(l2["partial_sums"][3].get<double>() ==
        doctest::Approx(0.30055230855906238).epsilon(1e-12));

  REQUIRE(blowup_lp_norm(b, 4.0, 4, &out) == 0);
  json l4 = json::parse(take(out));
  CHECK(l4["kind"] == "divergent");
  CHECK(l4["sum"].is_null());  // infinite sums serialize as null

  blowup_source* fd = nullptr;
  REQUIRE(blowup_source_create("example-d:8", &fd) == 0);
  REQUIRE(blowup_certificate(fd, b, 0.1, 20, &out) == 0);
  json cert = json::parse(take(out));
  CHECK(cert["kind"] == "divergent");
  CHECK(cert["n0"] == 2);
  CHECK(cert["c"].get<double>() == doctest::Approx(0.1 * 0.1 / 8.0).epsilon(1e-14));

  REQUIRE(blowup_onset_measure(fd, b, 0.5, 1e-12, &out) == 0);
  json onset = json::parse(take(out));
  CHECK(onset["pointwise_blowup"] == false);
  blowup_source_destroy(fd);

  blowup_blocks* cut = nullptr;
  REQUIRE(blowup_blocks_truncate(b, 16.0, &cut) == 0);
  REQUIRE(blowup_blocks_to_json(cut, &out) == 0);
  json jc = json::parse(take(out));
  CHECK(jc["blocks"].size() == 3);
  blowup_blocks_destroy(cut);
  blowup_blocks_destroy(b);
}

TEST_CASE("powerlaw norm and growth checks through the ABI") {
  char* out = nullptr;
  REQUIRE(blowup_powerlaw_norm(0.25, 2.0, 0.0, &out) == 0);
  json n = json::parse(take(out));
  CHECK(n["value"].get<double>() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(n["blowup_time"].get<double>() == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  blowup_source* fd = nullptr;
  REQUIRE(blowup_source_create("example-d:8", &fd) == 0);
  REQUIRE(blowup_growth_check(fd, 3.0, 1.0, 8, &out) == 0);
  json g = json::parse(take(out));
  CHECK(g["holds"] == true);

  double grid[] = {2.0, 2.5, 3.0, 3.5};
  REQUIRE(blowup_minimal_growth(fd, 1.0, grid, 4, 8, &out) == 0);
  json m = json::parse(take(out));
  CHECK(m["p"].get<double>() == 3.0);
  blowup_source_destroy(fd);

  REQUIRE(blowup_wellposedness_window(3.0, 2, 2.0, &out) == 0);
  json w = json::parse(take(out));
  CHECK(w["q_threshold"].get<double>() == 2.0);
  CHECK(w["contains_q"] == true);
}

TEST_CASE("rd solve through the ABI") {
  blowup_source* fd = nullptr;
  blowup_blocks* b = nullptr;
  blowup_mesh* mesh = nullptr;
  REQUIRE(blowup_source_create("example-d:8", &fd) == 0);
  REQUIRE(blowup_blocks_create("example-d", &b) == 0);
  REQUIRE(blowup_mesh_graded(1.0, std::exp2(-20.0), 0.7, 1.0 / 64.0, &mesh) == 0);

  json cfg = {{"dt", 1e-4}, {"theta", 1.0}, {"horizon", 0.02}, {"truncation", 16.0},
              {"supersolution", true}};
  char* out = nullptr;
  REQUIRE(blowup_rd_solve(fd, b, mesh, cfg.dump().c_str(), &out) == 0);
  json r = json::parse(take(out));
  CHECK(r["overflowed"] == false);
  CHECK(r["t_end"].get<double>() == doctest::Approx(0.02));
  CHECK(r["supersolution"]["ok"] == true);
  CHECK(r["trace"]["t"].size() >= 2);

  blowup_mesh_destroy(mesh);
  blowup_blocks_destroy(b);
  blowup_source_destroy(fd);
}

TEST_CASE("error paths set codes and messages") {
  blowup_source* s = nullptr;
  int rc = blowup_source_create("no-such-source", &s);
  CHECK(rc == BLOWUP_ERR_INVALID_ARGUMENT);
  CHECK(s == nullptr);
  const char* msg = blowup_last_error();
  REQUIRE(msg != nullptr);
  CHECK(std::strlen(msg) > 0);

  // Null outputs are invalid arguments, not crashes.
  CHECK(blowup_source_create("s_squared", nullptr) == BLOWUP_ERR_INVALID_ARGUMENT);
  CHECK(blowup_source_eval(nullptr, 1.0, nullptr) == BLOWUP_ERR_INVALID_ARGUMENT);

  // Domain errors carry their own code.
  char* out = nullptr;
  CHECK(blowup_powerlaw_norm(0.5, 2.0, 0.0, &out) == BLOWUP_ERR_DOMAIN);

  // Positivity refusal from the kinetics layer.
  blowup_source* zero = nullptr;
  REQUIRE(blowup_source_create("zero", &zero) == 0);
  CHECK(blowup_time_classify(zero, 1.0, 1e-10, &out) == BLOWUP_ERR_POSITIVITY);
  blowup_source_destroy(zero);

  // Destroying null handles is a no-op.
  blowup_source_destroy(nullptr);
  blowup_blocks_destroy(nullptr);
  blowup_mesh_destroy(nullptr);
}

TEST_CASE("default config is embedded in the library") {
  char* out = nullptr;
  REQUIRE(blowup_default_config(&out) == 0);
  json cfg = json::parse(take(out));
  CHECK(cfg["global"]["seed"] == 20240817);
  CHECK(cfg["scenarios"].contains("example-e"));
}
