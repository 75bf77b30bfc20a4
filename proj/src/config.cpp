#include "trisieve/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "trisieve/errors.hpp"

namespace trisieve {

using nlohmann::json;

json global_defaults() {
    return {{"seed", 1}, {"workers", 1}, {"slack", 0.04}, {"output", ""}, {"timing", false}};
}

json command_defaults(const std::string& c) {
    if (c == "exponents") return {{"m_exp", 0.188722}, {"box", {0.01, 0.99, 0.01, 0.99}}, {"tol", 1e-10}};
    if (c == "geometry_verify")
        return {{"dims", {16, 20, 24}},
                {"samples", 1000000},
                {"caps", {0.3, 0.347606, 0.427124, 0.5}},
                {"wedges", {{0.347606, 0.347606, 1.0 / 3.0}, {0.427124, 0.427124, 0.5773502691896258}, {0.45, 0.45, 1.0 / 3.0}}}};
    if (c == "rpc_verify")
        return {{"decode_instances", 100}, {"collision_d", 20}, {"collision_cos_alpha", 0.45},
                {"collision_cos_theta", 1.0 / 3.0}, {"collision_M", 0.0}, {"collision_draws", 400},
                {"collision_slack", 0.05}};
    if (c == "sieve_emulate")
        return {{"d", 12}, {"m", 128}, {"cos_alpha", 0.347606}, {"cos_alpha_prime", 0.427124},
                {"draws", 100000}, {"mode", "enumerate"}, {"delta_log2", -64.0}, {"eta", 2.0},
                {"chi_square", true}, {"ledger_parameterizations", 20}, {"three_list", false},
                {"three_list_d", 14}, {"three_list_runs", 10}, {"three_list_m_multiplier", 8.0}, {"ell1_multiplier", 4.0},
                {"ell2_multiplier", 3.0}};
    if (c == "svp_solve")
        return {{"basis", ""}, {"d", 20}, {"bits", 10}, {"list_multiplier", 32.0}, {"min_list", 64},
                {"rho", 0.9}, {"mu", 0.0}, {"max_iterations", 400}, {"patience", 3}, {"max_dim", 40},
                {"oracle", true}, {"ratio", 1.05}};
    if (c == "aa_demo")
        return {{"good_mass", 0.25}, {"delta", 1e-3}, {"eta", 2.0}, {"r", 0}, {"contract", false}};
    throw ConfigError("unknown command " + c);
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"exponents", "geometry_verify", "rpc_verify",
                                                "sieve_emulate", "svp_solve", "aa_demo"};
    return names;
}

namespace {
bool same_kind(const json& schema, const json& v) {
    if (schema.is_number()) {
        if (!v.is_number()) return false;
        // Integer slots reject fractional values.
        return !(schema.is_number_integer() && v.is_number_float());
    }
    if (schema.is_boolean()) return v.is_boolean();
    if (schema.is_string()) return v.is_string();
    if (schema.is_array()) return v.is_array();
    if (schema.is_object()) return v.is_object();
    return false;
}

void check_array(const json& schema, const json& v, const std::string& where) {
    if (schema.empty()) return;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string w = where + "[" + std::to_string(i) + "]";
        if (!same_kind(schema[0], v[i])) throw ConfigError("type mismatch at " + w);
        if (schema[0].is_array()) check_array(schema[0], v[i], w);
    }
}
}  // namespace

void check_against(const json& schema, const json& value, const std::string& where) {
    if (!value.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : value.items()) {
        if (!schema.contains(k)) throw ConfigError("unknown key " + where + "." + k);
        if (!same_kind(schema[k], v)) throw ConfigError("type mismatch at " + where + "." + k);
        if (v.is_array()) check_array(schema[k], v, where + "." + k);
    }
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig cfg;
    cfg.global = json::object();
    for (const auto& [k, v] : j.items()) {
        if (k == "global") {
            check_against(global_defaults(), v, "global");
            cfg.global = v;
            continue;
        }
        const auto& names = command_names();
        if (std::find(names.begin(), names.end(), k) == names.end()) throw ConfigError("unknown key " + k);
        check_against(command_defaults(k), v, k);
        cfg.blocks[k] = v;
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

json resolve_config(const ExperimentConfig& file, const std::string& command, const json& global_overrides,
                    const json& command_overrides) {
    json g = global_defaults();
    json c = command_defaults(command);
    check_against(g, global_overrides, "global");
    check_against(c, command_overrides, command);
    g.update(file.global);
    g.update(global_overrides);
    if (auto it = file.blocks.find(command); it != file.blocks.end()) c.update(it->second);
    c.update(command_overrides);
    return {{"global", g}, {command, c}};
}

}  // namespace trisieve
