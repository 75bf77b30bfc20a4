#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace trisieve {

// A config file is one JSON object with an optional "global" block and one
// block per command ("exponents", "geometry_verify", ...). Defaults double
// as the schema: unknown keys and type mismatches are errors.
struct ExperimentConfig {
    nlohmann::json global = nlohmann::json::object();
    std::map<std::string, nlohmann::json> blocks;
};

nlohmann::json global_defaults();
nlohmann::json command_defaults(const std::string& command);
const std::vector<std::string>& command_names();

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// defaults <- config file <- overrides; the result is echoed into reports as
// {"global": ..., "<command>": ...}.
nlohmann::json resolve_config(const ExperimentConfig& file, const std::string& command,
                              const nlohmann::json& global_overrides,
                              const nlohmann::json& command_overrides);

void check_against(const nlohmann::json& schema, const nlohmann::json& value, const std::string& where);

}  // namespace trisieve
