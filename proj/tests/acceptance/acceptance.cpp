// Runs every acceptance criterion and prints one line per criterion.
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>

#include "eigenop/validation.hpp"

int main(int argc, char** argv) {
    eigenop::ValidationOptions options;
    options.workdir = argc > 1 ? std::filesystem::path(argv[1])
                               : std::filesystem::temp_directory_path() / "eigenop_acceptance";
    if (const char* t = std::getenv("EIGENOP_THREADS")) options.threads = std::atoi(t);
    options.on_result = [](const eigenop::CriterionResult& r) {
        std::printf("%s\n", eigenop::format_result(r).c_str());
        std::fflush(stdout);
    };
    try {
        const auto summary = eigenop::run_acceptance(options);
        std::printf("%s\n", summary.passed() ? "acceptance: all criteria passed" : "acceptance: FAILED");
        return summary.passed() ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance: %s\n", e.what());
        return 2;
    }
}
