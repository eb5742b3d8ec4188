#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eigenop/config.hpp"

namespace eigenop {

enum class Stage { assemble, eig, oseledets, eigenop, cocycle_field, all };

std::string to_string(Stage stage);
Stage stage_from_string(const std::string& name);

struct PipelineOptions {
    std::filesystem::path out;  // empty: the config's outputs.directory
    int threads = 1;
    std::uint64_t seed = 1;
    std::function<void(const std::string&)> log;  // progress lines; may be empty
};

struct Artifact {
    std::string path;  // relative to the output directory
    std::string sha256;
};

struct RunResult {
    std::filesystem::path directory;
    std::vector<std::string> stages;
    std::vector<Artifact> artifacts;
    std::vector<std::string> skipped;  // matrix exports above outputs.max_matrix_dim
    bool eig_reused = false;
    nlohmann::json manifest;
};

/// Error raised inside a stage. The message is prefixed with the stage name and the
/// category keeps the type of the original error.
class StageError : public std::runtime_error {
public:
    enum class Category { configuration, numerical, io };

    StageError(std::string stage, Category category, const std::string& what)
        : std::runtime_error("stage '" + stage + "': " + what), stage_(std::move(stage)), category_(category) {}

    const std::string& stage() const noexcept { return stage_; }
    Category category() const noexcept { return category_; }

private:
    std::string stage_;
    Category category_;
};

/// Runs every stage up to and including `last`. Eigenpairs are reused from a previous
/// run in the same directory when its manifest carries the same config hash.
RunResult run_pipeline(const RunConfig& config, Stage last, const PipelineOptions& options = {});

}  // namespace eigenop
