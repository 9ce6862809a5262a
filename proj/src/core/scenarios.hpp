#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace blowup {

/// Built-in configuration (mirrors share/blowup_lab_defaults.json).
nlohmann::json default_config();

const std::vector<std::string>& scenario_names();

struct ScenarioResult {
  std::string name;
  nlohmann::json manifest;  // params, param_hash, files, checks
  std::vector<std::string> files;
  int checks_passed = 0;
  int checks_failed = 0;
};

/// Runs one named scenario with `overrides` merged over the defaults and
/// writes its result files under out_dir. Internal consistency checks are
/// reported in the manifest, not thrown: a failed check marks the result,
/// the caller decides the exit code.
ScenarioResult run_scenario(const std::string& name, const nlohmann::json& overrides,
                            const std::string& out_dir);

}  // namespace blowup
