#include "eigenop/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eigenop/error.hpp"
#include "eigenop/io.hpp"

namespace eigenop {

namespace {

using nlohmann::json;

const char* type_name(const json& j) {
    if (j.is_boolean()) return "boolean";
    if (j.is_number_integer()) return "integer";
    if (j.is_number()) return "number";
    if (j.is_string()) return "string";
    if (j.is_array()) return "array";
    if (j.is_object()) return "object";
    return "null";
}

bool same_kind(const json& given, const json& schema) {
    if (schema.is_boolean()) return given.is_boolean();
    if (schema.is_number_integer()) return given.is_number_integer();
    if (schema.is_number()) return given.is_number();
    if (schema.is_string()) return given.is_string();
    return false;
}

struct Merger {
    std::vector<std::string> errors;
    std::vector<std::string> applied;

    void leaves(const json& value, const std::string& path) {
        if (value.is_object() && !value.empty()) {
            for (auto it = value.begin(); it != value.end(); ++it) leaves(it.value(), path + "/" + it.key());
        } else {
            applied.push_back(path);
        }
    }

    json merge(const json& given, const json& schema, const std::string& path) {
        if (schema.is_object()) {
            if (!given.is_object()) {
                errors.push_back(path + ": expected object, got " + type_name(given));
                return schema;
            }
            json out = json::object();
            for (auto it = given.begin(); it != given.end(); ++it)
                if (!schema.contains(it.key())) errors.push_back(path + "/" + it.key() + ": unknown key");
            for (auto it = schema.begin(); it != schema.end(); ++it) {
                const std::string p = path + "/" + it.key();
                if (given.contains(it.key())) {
                    out[it.key()] = merge(given.at(it.key()), it.value(), p);
                } else {
                    out[it.key()] = it.value();
                    leaves(it.value(), p);
                }
            }
            return out;
        }
        if (schema.is_array()) {
            if (!given.is_array()) {
                errors.push_back(path + ": expected array, got " + type_name(given));
                return schema;
            }
            if (!schema.empty())
                for (std::size_t i = 0; i < given.size(); ++i)
                    if (!same_kind(given[i], schema[0]))
                        errors.push_back(path + "/" + std::to_string(i) + ": expected " + type_name(schema[0]) + ", got " +
                                         type_name(given[i]));
            return given;
        }
        if (!same_kind(given, schema)) {
            errors.push_back(path + ": expected " + std::string(type_name(schema)) + ", got " + type_name(given));
            return schema;
        }
        return schema.is_number_float() ? json(given.get<double>()) : given;
    }
};

json parameters_json(const ParameterMap& p) {
    auto number = [](double x) -> json {
        if (std::floor(x) == x && std::abs(x) < 1e15) return static_cast<long long>(x);
        return x;
    };
    json out = json::object();
    for (const auto& [k, v] : p) {
        if (v.size() == 1) {
            out[k] = number(v[0]);
        } else {
            out[k] = json::array();
            for (double x : v) out[k].push_back(number(x));
        }
    }
    return out;
}

json outputs_defaults() {
    return {{"directory", "eigenop_out"}, {"matrices", true}, {"csv", true}, {"ppm", true}, {"max_matrix_dim", 1024}};
}

std::vector<int> ints(const json& j) { return j.get<std::vector<int>>(); }

}  // namespace

json default_config(const std::string& system) {
    if (!is_continuous_system(system) && !is_discrete_map(system)) throw ConfigurationError("/system/name: unknown system '" + system + "'");
    json doc;
    doc["system"] = {{"name", system}, {"parameters", parameters_json(default_parameters(system))}};
    doc["outputs"] = outputs_defaults();
    if (is_continuous_system(system)) {
        const bool rotation = system == "rotation";
        const bool strat = system == "stratospheric";
        doc["truncation"] = {{"cutoffs", rotation ? json({8, 8}) : json({8, 8, 8})}};
        doc["grid"] = {{"points", rotation ? json({32, 32}) : strat ? json({32, 32, 256}) : json({32, 32, 32})}};
        doc["smoothing"] = {{"enabled", !rotation}, {"tau", 0.1}, {"p", 0.1}, {"rule", "power"}, {"symmetric", false}};
        doc["decomposition"] = {{"mode", rotation ? "fiber_sector" : strat ? "rank_one" : "leading_span"},
                                {"sort_target", {1e-10, 0.0}},
                                {"eig_tolerance", 1e-10},
                                {"d", rotation || strat ? 1 : 30},
                                {"j", rotation ? json({1, 2}) : strat ? json({1, 2, 3}) : json({1})}};
        doc["evaluation"] = {{"y", 0.0},
                             {"s", system == "gaussian_vortex" ? 0.1 : 0.0},
                             {"y_samples", 64},
                             {"steps_per_unit_time", 200},
                             {"d_values", system == "gaussian_vortex" ? json({1, 2, 10, 20, 30}) : json({1})},
                             {"field_grid", rotation ? json({128}) : json({128, 128})}};
    } else {
        if (system == "torus_translation") doc["truncation"] = {{"fiber_cutoff", 6}};
        doc["decomposition"] = {{"mode", "periodic_bins"}, {"bin_count", 3}, {"bin_offset", 0.1}};
        doc["evaluation"] = {{"y", 0.3}, {"i_range", {-2, 2}}, {"y_samples", 64}};
    }
    return doc;
}

TruncatedBasis RunConfig::basis() const {
    std::vector<int> fiber(cutoffs.begin() + 1, cutoffs.end());
    return TruncatedBasis::skew(cutoffs.front(), fiber);
}

Grid RunConfig::quadrature_grid() const { return Grid(grid); }

TruncatedBasis RunConfig::fiber_basis() const { return basis().fiber_basis(); }

Grid RunConfig::fiber_grid() const { return Grid(std::vector<int>(grid.begin() + 1, grid.end())); }

std::size_t RunConfig::leading_vectors() const {
    std::size_t n = decomposition.d;
    for (auto d : evaluation.d_values) n = std::max(n, d);
    if (decomposition.mode == "rank_one")
        for (int j : decomposition.j) n = std::max(n, static_cast<std::size_t>(j));
    return n;
}

RunConfig parse_config(const json& given) {
    if (!given.is_object()) throw ConfigurationError("/: expected a JSON object");
    if (!given.contains("system") || !given["system"].is_object() || !given["system"].contains("name"))
        throw ConfigurationError("/system/name: required key is missing");
    if (!given["system"]["name"].is_string()) throw ConfigurationError("/system/name: expected string");
    const std::string name = given["system"]["name"].get<std::string>();
    const json schema = default_config(name);

    Merger m;
    // parameters are checked by the system registry, which knows each parameter's arity
    json trimmed = given;
    json params = json::object();
    const bool has_params = trimmed["system"].contains("parameters");
    if (has_params) {
        params = trimmed["system"]["parameters"];
        trimmed["system"].erase("parameters");
    } else {
        m.leaves(schema["system"]["parameters"], "/system/parameters");
    }
    json schema_wo = schema;
    schema_wo["system"].erase("parameters");
    json resolved = m.merge(trimmed, schema_wo, "");

    RunConfig cfg;
    cfg.system = name;
    cfg.discrete = is_discrete_map(name);
    if (!params.is_object()) {
        m.errors.push_back("/system/parameters: expected object");
    } else {
        ParameterMap given_params;
        for (auto it = params.begin(); it != params.end(); ++it) {
            const auto& v = it.value();
            if (v.is_number()) {
                given_params[it.key()] = {v.get<double>()};
            } else if (v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
                given_params[it.key()] = v.get<std::vector<double>>();
            } else {
                m.errors.push_back("/system/parameters/" + it.key() + ": expected number or array of numbers");
            }
        }
        try {
            cfg.parameters = resolve_parameters(name, given_params);
            for (const auto& [k, v] : default_parameters(name))
                if (!given_params.count(k) && has_params) m.applied.push_back("/system/parameters/" + k);
        } catch (const ConfigurationError& e) {
            m.errors.push_back(std::string("/system/parameters: ") + e.what());
        }
    }
    resolved["system"]["parameters"] = parameters_json(cfg.parameters);

    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) m.errors.push_back(msg);
    };

    if (m.errors.empty()) {
        const auto& out = resolved["outputs"];
        cfg.outputs.directory = out["directory"].get<std::string>();
        cfg.outputs.matrices = out["matrices"].get<bool>();
        cfg.outputs.csv = out["csv"].get<bool>();
        cfg.outputs.ppm = out["ppm"].get<bool>();
        check(out["max_matrix_dim"].get<long>() >= 0, "/outputs/max_matrix_dim: must be non-negative");
        cfg.outputs.max_matrix_dim = static_cast<std::size_t>(std::max(0L, out["max_matrix_dim"].get<long>()));
        check(!cfg.outputs.directory.empty(), "/outputs/directory: must not be empty");

        const auto& dec = resolved["decomposition"];
        const auto& ev = resolved["evaluation"];
        cfg.decomposition.mode = dec["mode"].get<std::string>();
        cfg.evaluation.y = ev["y"].get<double>();
        cfg.evaluation.y_samples = static_cast<std::size_t>(std::max(0, ev["y_samples"].get<int>()));
        check(ev["y_samples"].get<int>() >= 1, "/evaluation/y_samples: must be at least 1");

        if (!cfg.discrete) {
            const auto sys = make_continuous_system(name, cfg.parameters);
            const std::size_t dims = 1 + sys.fiber_dimension;
            cfg.cutoffs = ints(resolved["truncation"]["cutoffs"]);
            cfg.grid = ints(resolved["grid"]["points"]);
            check(cfg.cutoffs.size() == dims, "/truncation/cutoffs: expected " + std::to_string(dims) + " entries");
            check(cfg.grid.size() == dims, "/grid/points: expected " + std::to_string(dims) + " entries");
            for (int k : cfg.cutoffs) check(k >= 1, "/truncation/cutoffs: every cutoff must be at least 1");
            if (cfg.cutoffs.size() == dims && cfg.grid.size() == dims)
                for (std::size_t d = 0; d < dims; ++d)
                    check(cfg.grid[d] >= 2 * cfg.cutoffs[d] + 1,
                          "/grid/points/" + std::to_string(d) + ": needs at least 2*cutoff+1 points");

            const auto& sm = resolved["smoothing"];
            cfg.smoothing.enabled = sm["enabled"].get<bool>();
            cfg.smoothing.tau = sm["tau"].get<double>();
            cfg.smoothing.p = sm["p"].get<double>();
            cfg.smoothing.rule = sm["rule"].get<std::string>();
            cfg.smoothing.symmetric = sm["symmetric"].get<bool>();
            check(cfg.smoothing.tau >= 0.0, "/smoothing/tau: must be non-negative");
            check(cfg.smoothing.p > 0.0, "/smoothing/p: must be positive");
            check(cfg.smoothing.rule == "power" || cfg.smoothing.rule == "kernel", "/smoothing/rule: expected 'power' or 'kernel'");

            const auto target = dec["sort_target"].get<std::vector<double>>();
            check(target.size() == 2, "/decomposition/sort_target: expected [re, im]");
            if (target.size() == 2) cfg.decomposition.sort_target = {target[0], target[1]};
            cfg.decomposition.eig_tolerance = dec["eig_tolerance"].get<double>();
            check(cfg.decomposition.eig_tolerance > 0.0, "/decomposition/eig_tolerance: must be positive");
            check(dec["d"].get<int>() >= 1, "/decomposition/d: must be at least 1");
            cfg.decomposition.d = static_cast<std::size_t>(std::max(1, dec["d"].get<int>()));
            cfg.decomposition.j = ints(dec["j"]);
            check(!cfg.decomposition.j.empty(), "/decomposition/j: must not be empty");
            const auto& mode = cfg.decomposition.mode;
            check(mode == "leading_span" || mode == "rank_one" || mode == "fiber_sector",
                  "/decomposition/mode: expected 'leading_span', 'rank_one' or 'fiber_sector'");
            if (mode == "fiber_sector") {
                for (int j : cfg.decomposition.j)
                    check(cfg.cutoffs.size() >= 2 && std::abs(j) <= cfg.cutoffs[1], "/decomposition/j: fiber mode outside the truncation");
                check(sys.fiber_dimension == 1, "/decomposition/mode: 'fiber_sector' needs a one-dimensional fiber");
            } else {
                for (int j : cfg.decomposition.j) check(j >= 1, "/decomposition/j: indices start at 1");
            }

            cfg.evaluation.s = ev["s"].get<double>();
            cfg.evaluation.steps_per_unit_time = ev["steps_per_unit_time"].get<int>();
            check(cfg.evaluation.steps_per_unit_time >= 1, "/evaluation/steps_per_unit_time: must be at least 1");
            for (int d : ints(ev["d_values"])) {
                check(d >= 1, "/evaluation/d_values: entries must be at least 1");
                cfg.evaluation.d_values.push_back(static_cast<std::size_t>(std::max(1, d)));
            }
            cfg.evaluation.field_grid = ints(ev["field_grid"]);
            check(cfg.evaluation.field_grid.size() == sys.fiber_dimension,
                  "/evaluation/field_grid: expected " + std::to_string(sys.fiber_dimension) + " entries");
            for (int p : cfg.evaluation.field_grid) check(p >= 2, "/evaluation/field_grid: at least 2 points per axis");
            if (m.errors.empty()) {
                const std::size_t n = cfg.basis().size();
                check(cfg.leading_vectors() <= n, "/decomposition: requests more eigenvectors than the basis holds");
            }
        } else {
            if (resolved.contains("truncation")) {
                cfg.fiber_cutoff = resolved["truncation"]["fiber_cutoff"].get<int>();
                check(cfg.fiber_cutoff >= 0, "/truncation/fiber_cutoff: must be non-negative");
            }
            check(cfg.decomposition.mode == "periodic_bins", "/decomposition/mode: discrete maps support 'periodic_bins' only");
            check(dec["bin_count"].get<int>() >= 1, "/decomposition/bin_count: must be at least 1");
            cfg.decomposition.bin_count = static_cast<std::size_t>(std::max(1, dec["bin_count"].get<int>()));
            cfg.decomposition.bin_offset = dec["bin_offset"].get<double>();
            const auto range = ints(ev["i_range"]);
            check(range.size() == 2 && range[0] <= range[1], "/evaluation/i_range: expected [min, max] with min <= max");
            if (range.size() == 2) {
                cfg.evaluation.i_min = range[0];
                cfg.evaluation.i_max = range[1];
            }
            try {
                const auto map = make_discrete_map(name, cfg.parameters);
                check(map.base_period.has_value(), "/system: periodic base map required");
            } catch (const ConfigurationError& e) {
                m.errors.push_back(std::string("/system/parameters: ") + e.what());
            }
        }
    }

    if (!m.errors.empty()) {
        std::ostringstream msg;
        msg << "invalid configuration:";
        for (const auto& e : m.errors) msg << "\n  " << e;
        throw ConfigurationError(msg.str());
    }
    std::sort(m.applied.begin(), m.applied.end());
    cfg.resolved = resolved;
    cfg.defaults_applied = m.applied;
    cfg.hash = sha256_hex(resolved.dump());
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_json(path)); }

}  // namespace eigenop
