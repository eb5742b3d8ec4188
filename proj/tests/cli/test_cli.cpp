#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "eigenop/io.hpp"
#include "eigenop/oracles.hpp"
#include "eigenop/spectra.hpp"

namespace fs = std::filesystem;
using namespace eigenop;

namespace {

const fs::path root = fs::temp_directory_path() / "eigenop_test_cli";

int run(const std::string& args) {
    const std::string cmd = std::string(EIGENOP_BINARY) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const std::string& text) {
    fs::create_directories(root);
    const auto p = root / name;
    write_text(p, text);
    return p;
}

std::string bundled(const std::string& system) { return std::string(EIGENOP_CONFIG_DIR) + "/" + system + ".json"; }

}  // namespace

TEST(Cli, EmptyConfigIsAConfigurationError) {
    EXPECT_EQ(run("assemble --config " + write_config("empty.json", "{}").string() + " --out " + (root / "e").string()), 2);
}

TEST(Cli, UnknownKeyIsAConfigurationError) {
    const auto p = write_config("unknown.json", R"({"system": {"name": "rotation"}, "colour": 1})");
    EXPECT_EQ(run("assemble --config " + p.string() + " --out " + (root / "u").string()), 2);
}

TEST(Cli, MissingConfigFileIsAnIoError) {
    EXPECT_EQ(run("assemble --config " + (root / "absent.json").string()), 4);
}

TEST(Cli, BundledRotationSpectrum) {
    const auto out = root / "rotation";
    fs::remove_all(out);
    ASSERT_EQ(run("eig --config " + bundled("rotation") + " --out " + out.string()), 0);
    const auto spectrum = read_json(out / "eig/spectrum.json");
    std::vector<cplx> computed;
    for (const auto& z : spectrum["eigenvalues"]) computed.emplace_back(z[0].get<double>(), z[1].get<double>());
    std::vector<cplx> expected;
    for (int k = -2; k <= 2; ++k)
        for (int j = -2; j <= 2; ++j) expected.push_back(rotation_generator_eigenvalue(0.7, k, j));
    EXPECT_TRUE(spectra_match(expected, computed, 1e-8, false));
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
    const auto a = root / "det_a";
    const auto b = root / "det_b";
    fs::remove_all(a);
    fs::remove_all(b);
    ASSERT_EQ(run("all --config " + bundled("torus_translation") + " --out " + a.string()), 0);
    ASSERT_EQ(run("all --config " + bundled("torus_translation") + " --out " + b.string() + " --threads 2"), 0);
    EXPECT_EQ(read_text(a / "manifest.json"), read_text(b / "manifest.json"));
}

TEST(Cli, ValidateSubset) {
    EXPECT_EQ(run("validate --only 1,2 --out " + (root / "v").string()), 0);
    const auto summary = read_json(root / "v/validation.json");
    EXPECT_TRUE(summary["passed"].get<bool>());
}

TEST(Cli, FixturesFailValidation) {
    EXPECT_EQ(run("validate --only 12 --fixture sign_error --out " + (root / "f1").string()), 1);
    EXPECT_EQ(run("validate --only 3 --fixture reduced_steps --out " + (root / "f2").string()), 1);
    EXPECT_EQ(run("validate --fixture no_such_fixture --out " + (root / "f3").string()), 2);
}

TEST(Cli, UnknownSubcommand) { EXPECT_NE(run("fit"), 0); }
