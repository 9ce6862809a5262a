#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

namespace blowup {

/// Deterministic rendering: object keys sorted, floats printed with %.17g
/// (round-trip exact), non-finite numbers as null. Reruns diff cleanly.
std::string canonical_json(const nlohmann::json& j, int indent = 2);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const nlohmann::json& j);

/// CSV with a pinned header; each row must match the header width.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

uint64_t fnv1a64(std::string_view s);
/// 16 hex digits hashing the canonical form; stamped into manifests so a
/// result file can be tied to the exact parameters that made it.
std::string param_hash(const nlohmann::json& j);

}  // namespace blowup
