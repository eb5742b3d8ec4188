#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eigenop/config.hpp"
#include "eigenop/error.hpp"
#include "eigenop/io.hpp"
#include "eigenop/pipeline.hpp"
#include "eigenop/validation.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitSchema = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

int default_threads() {
    if (const char* env = std::getenv("EIGENOP_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
        std::cerr << "eigenop: ignoring EIGENOP_THREADS='" << env << "'\n";
    }
    return 1;
}

int fail(const std::string& stage, const std::string& what, int code) {
    std::cerr << "eigenop: stage '" << stage << "': " << what << "\n";
    return code;
}

int exit_code(eigenop::StageError::Category c) {
    switch (c) {
        case eigenop::StageError::Category::configuration: return kExitSchema;
        case eigenop::StageError::Category::numerical: return kExitNumerical;
        case eigenop::StageError::Category::io: return kExitIo;
    }
    return kExitNumerical;
}

int run_stage_command(const std::string& stage, const std::string& config_path, const std::string& out, int threads,
                      std::uint64_t seed) {
    eigenop::RunConfig config;
    try {
        config = eigenop::load_config(config_path);
    } catch (const eigenop::ConfigurationError& e) {
        return fail("config", e.what(), kExitSchema);
    } catch (const eigenop::IoError& e) {
        return fail("config", e.what(), kExitIo);
    }
    eigenop::PipelineOptions options;
    options.out = out;
    options.threads = threads;
    options.seed = seed;
    options.log = [](const std::string& line) { std::cerr << line << "\n"; };
    try {
        const auto result = eigenop::run_pipeline(config, eigenop::stage_from_string(stage), options);
        std::cout << "wrote " << result.artifacts.size() << " artifacts to " << result.directory.string() << "\n";
        for (const auto& s : result.skipped) std::cout << "skipped export (above max_matrix_dim): " << s << "\n";
    } catch (const eigenop::StageError& e) {
        std::cerr << "eigenop: " << e.what() << "\n";
        return exit_code(e.category());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Eigenoperator decomposition of skew-product systems"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(EIGENOP_VERSION));

    std::string config_path;
    std::string out;
    int threads = default_threads();
    std::uint64_t seed = 1;

    const std::vector<std::pair<std::string, std::string>> stages = {
        {"assemble", "Assemble the generator or fiber Koopman matrices"},
        {"eig", "Eigendecomposition (cached for later stages)"},
        {"oseledets", "Invariant fiber subspaces"},
        {"eigenop", "Eigenoperator spectra"},
        {"cocycle-field", "Cocycle fields and matrices"},
        {"all", "Every stage"}};
    for (const auto& [name, help] : stages) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "Run configuration (JSON)")->required();
        sub->add_option("--out", out, "Output directory (default: outputs.directory)");
        sub->add_option("--threads", threads, "Worker threads (default: EIGENOP_THREADS or 1)")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Seed for randomized checks");
    }

    std::vector<int> only;
    std::string fixture;
    auto* validate = app.add_subcommand("validate", "Run the oracle and property suite");
    validate->add_option("--only", only, "Criterion ids to run")->delimiter(',');
    validate->add_option("--fixture", fixture, "Inject a known fault")->check(CLI::IsMember(eigenop::validation_fixtures()));
    validate->add_option("--out", out, "Scratch and summary directory (default: eigenop_validate)");
    validate->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitSchema;
    }

    if (validate->parsed()) {
        eigenop::ValidationOptions options;
        options.only = only;
        options.fixture = fixture;
        options.threads = threads;
        options.workdir = out.empty() ? "eigenop_validate" : out;
        options.on_result = [](const eigenop::CriterionResult& r) { std::cout << eigenop::format_result(r) << std::endl; };
        const auto summary = eigenop::run_acceptance(options);
        try {
            eigenop::write_json(options.workdir / "validation.json", summary.to_json());
        } catch (const std::exception& e) {
            return fail("validate", e.what(), kExitIo);
        }
        std::cout << (summary.passed() ? "all criteria passed" : "some criteria failed") << "; summary in "
                  << (options.workdir / "validation.json").string() << "\n";
        return summary.passed() ? 0 : kExitValidation;
    }

    for (const auto& [name, help] : stages)
        if (app.got_subcommand(name)) return run_stage_command(name, config_path, out, threads, seed);
    return kExitSchema;
}
