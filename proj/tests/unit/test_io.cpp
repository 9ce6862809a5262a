#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "core/canon_io.hpp"
#include "core/errors.hpp"
#include "core/scenarios.hpp"
#include "doctest.h"

using namespace blowup;

TEST_CASE("canonical json: sorted keys, round-trip floats, null non-finites") {
  nlohmann::json j;
  j["zeta"] = 2.0;
  j["alpha"] = 0.1;
  j["bad"] = std::nan("");
  std::string s = canonical_json(j, 0);
  CHECK(s.find("\"alpha\"") < s.find("\"bad\""));
  CHECK(s.find("\"bad\"") < s.find("\"zeta\""));
  CHECK(s.find("null") != std::string::npos);
  CHECK(s.find("0.1000000000000000") != std::string::npos);  // %.17g round trip
  CHECK(s.back() == '\n');

  // Rendering is deterministic against key insertion order.
  nlohmann::json a = {{"x", 1}, {"y", nlohmann::json::array({1.5, 2.5})}};
  nlohmann::json b;
  b["y"] = nlohmann::json::array({1.5, 2.5});
  b["x"] = 1;
  CHECK(canonical_json(a) == canonical_json(b));
}

TEST_CASE("fnv1a64 matches the published test vectors") {
  CHECK(fnv1a64("") == 14695981039346656037ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("param_hash is stable and sensitive") {
  nlohmann::json a = {{"p", 2.0}, {"seed", 7}};
  nlohmann::json b;
  b["seed"] = 7;
  b["p"] = 2.0;
  CHECK(param_hash(a) == param_hash(b));
  CHECK(param_hash(a).size() == 16);
  b["p"] = 2.5;
  CHECK(param_hash(a) != param_hash(b));
}

TEST_CASE("text and csv files round trip") {
  auto dir = std::filesystem::temp_directory_path() / "blowup_io_test";
  std::filesystem::create_directories(dir);
  auto txt = (dir / "t.txt").string();
  write_text_file(txt, "payload\n");
  CHECK(read_text_file(txt) == "payload\n");
  CHECK_THROWS_AS((void)read_text_file((dir / "missing.txt").string()), Error);

  auto csv = (dir / "t.csv").string();
  write_csv(csv, {"t", "value"},
            {{0.5, 1.25}, {1.0, std::numeric_limits<double>::infinity()}});
  std::string body = read_text_file(csv);
  CHECK(body.find("t,value") == 0);
  CHECK(body.find("inf") != std::string::npos);
  CHECK_THROWS_AS(write_csv(csv, {"a"}, {{1.0, 2.0}}), Error);  // width mismatch
  std::filesystem::remove_all(dir);
}

TEST_CASE("default config carries every scenario and tool block") {
  nlohmann::json cfg = default_config();
  CHECK(cfg.contains("global"));
  for (const auto& name : scenario_names()) CHECK(cfg["scenarios"].contains(name));
  CHECK(cfg["tools"].contains("rd-run"));
  CHECK(cfg["global"]["seed"].get<long long>() == 20240817);
}

TEST_CASE("scenario example-b runs green end to end") {
  auto dir = std::filesystem::temp_directory_path() / "blowup_scenario_b";
  std::filesystem::remove_all(dir);
  ScenarioResult r = run_scenario("example-b", nlohmann::json::object(), dir.string());
  CHECK(r.checks_failed == 0);
  CHECK(r.checks_passed > 0);
  REQUIRE(!r.files.empty());
  for (const auto& f : r.files) CHECK(std::filesystem::exists(dir / f));
  CHECK(r.manifest["param_hash"].get<std::string>().size() == 16);
  // Overrides reach the scenario and change the manifest hash.
  nlohmann::json ov = {{"scenarios", {{"example-b", {{"t_steps", 10}}}}}};
  ScenarioResult r2 = run_scenario("example-b", ov, dir.string());
  CHECK(r2.checks_failed == 0);
  CHECK(r2.manifest["param_hash"] != r.manifest["param_hash"]);
  std::filesystem::remove_all(dir);
}

TEST_CASE("unknown scenario is refused") {
  CHECK_THROWS_AS((void)run_scenario("example-z", nlohmann::json::object(), "/tmp/x"), Error);
}
