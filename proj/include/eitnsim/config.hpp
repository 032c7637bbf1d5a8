#pragma once

#include "eitnsim/scenario.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace eitnsim {

using Json = nlohmann::json;

/// Everything a CLI run needs. The JSON form is the single source of truth:
/// every field round-trips through to_json / run_config_from_json.
struct RunConfig {
  Scenario scenario;
  std::string output_csv = "spectrum.csv";
  std::uint64_t seed = 20000131;
  int threads = 0;
};

Json to_json(const RunConfig& config);

/// Strict parse: unknown or missing keys raise ConfigError naming the path.
RunConfig run_config_from_json(const Json& j);

/// Preset as a complete JSON tree.
Json scenario_json(const std::string& name);

/// Sets a dotted key ("modulation.ratio=0.1") on an existing tree. The key
/// must already exist; the value is parsed as JSON, falling back to a string.
void apply_override(Json& tree, const std::string& assignment);

/// Builds the config tree: preset (from --scenario or the file's "scenario"
/// key, default fig2a), merged with the file contents, then overrides.
Json load_config_tree(const std::string& scenario_name,
                      const std::string& config_path,
                      const std::vector<std::string>& overrides);

/// FNV-1a 64-bit hash of the canonical config dump, ignoring output paths and
/// the thread count. Rendered as 16 hex digits.
std::string config_hash(const RunConfig& config);

} // namespace eitnsim
