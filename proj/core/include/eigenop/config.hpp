#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eigenop/basis.hpp"
#include "eigenop/systems.hpp"

namespace eigenop {

struct SmoothingConfig {
    bool enabled = false;
    double tau = 0.0;
    double p = 1.0;
    std::string rule = "power";
    bool symmetric = false;
};

struct DecompositionConfig {
    std::string mode;  // leading_span | rank_one | fiber_sector | periodic_bins
    cplx sort_target{1e-10, 0.0};
    double eig_tolerance = 1e-10;
    std::size_t d = 1;
    std::vector<int> j;
    std::size_t bin_count = 1;
    double bin_offset = 0.0;
};

struct EvaluationConfig {
    double y = 0.0;
    double s = 0.0;
    int i_min = 0;
    int i_max = 0;
    std::size_t y_samples = 64;
    int steps_per_unit_time = 200;
    std::vector<std::size_t> d_values;
    std::vector<int> field_grid;
};

struct OutputConfig {
    std::string directory = "eigenop_out";
    bool matrices = true;
    bool csv = true;
    bool ppm = true;
    std::size_t max_matrix_dim = 1024;
};

struct RunConfig {
    std::string system;
    bool discrete = false;
    ParameterMap parameters;
    std::vector<int> cutoffs;  // continuous systems: base cutoff first
    std::vector<int> grid;     // continuous systems: quadrature points per factor
    int fiber_cutoff = 0;      // discrete maps with torus fibers
    SmoothingConfig smoothing;
    DecompositionConfig decomposition;
    EvaluationConfig evaluation;
    OutputConfig outputs;

    nlohmann::json resolved;
    std::vector<std::string> defaults_applied;  // JSON pointers filled from defaults
    std::string hash;                           // sha256 of the compact resolved document

    TruncatedBasis basis() const;
    Grid quadrature_grid() const;
    TruncatedBasis fiber_basis() const;
    Grid fiber_grid() const;
    /// Largest number of leading eigenvectors any stage needs.
    std::size_t leading_vectors() const;
};

/// Complete default document for a system; also serves as the schema.
nlohmann::json default_config(const std::string& system);

/// Validates against the defaults of the named system. Unknown keys, wrong types and
/// out-of-range values are collected and reported together as a ConfigurationError.
RunConfig parse_config(const nlohmann::json& given);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace eigenop
