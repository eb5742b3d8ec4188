#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace eigenop {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    nlohmann::json metrics = nlohmann::json::object();
};

struct ValidationOptions {
    std::vector<int> only;          // empty: every criterion
    std::string fixture;            // "", "sign_error" or "reduced_steps"
    int threads = 1;
    std::filesystem::path workdir;  // scratch space for pipeline runs
    std::function<void(const CriterionResult&)> on_result;
};

struct ValidationSummary {
    std::vector<CriterionResult> results;
    std::string fixture;

    bool passed() const;
    nlohmann::json to_json() const;
};

std::vector<std::string> validation_fixtures();
std::size_t criterion_count();

/// Runs the oracle and property suite. A fixture deliberately corrupts one input so
/// that the corresponding check is seen to fail.
ValidationSummary run_acceptance(const ValidationOptions& options = {});

/// "PASS  3  cocycle closed form: ..." style line.
std::string format_result(const CriterionResult& r);

}  // namespace eigenop
