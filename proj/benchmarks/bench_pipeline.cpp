#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <string>

#include "eigenop/cocycle.hpp"
#include "eigenop/config.hpp"
#include "eigenop/eigenoperator.hpp"
#include "eigenop/generator.hpp"
#include "eigenop/oseledets.hpp"
#include "eigenop/spectra.hpp"
#include "eigenop/systems.hpp"

using namespace eigenop;

namespace {

struct Model {
    RunConfig config;
    ContinuousSkewSystem system;
    TruncatedBasis basis;
    OperatorMatrix generator;
    SpectrumReport spectrum;
};

// Assembled and diagonalized once per process.
const Model& model(const std::string& name) {
    static std::map<std::string, std::unique_ptr<Model>> cache;
    auto& slot = cache[name];
    if (!slot) {
        slot = std::make_unique<Model>();
        slot->config = parse_config(default_config(name));
        slot->system = make_continuous_system(name, slot->config.parameters);
        slot->basis = slot->config.basis();
        slot->generator = assemble_generator(slot->system, slot->basis, slot->config.quadrature_grid()).matrix;
        slot->spectrum = sort_by_target(eig(slot->generator, slot->config.decomposition.eig_tolerance),
                                        slot->config.decomposition.sort_target);
    }
    return *slot;
}

void BM_AssembleRotation(benchmark::State& state) {
    const auto cfg = parse_config(default_config("rotation"));
    const auto system = make_continuous_system("rotation", cfg.parameters);
    const auto basis = cfg.basis();
    const auto grid = cfg.quadrature_grid();
    for (auto _ : state) benchmark::DoNotOptimize(assemble_generator(system, basis, grid));
}
BENCHMARK(BM_AssembleRotation)->Unit(benchmark::kMillisecond);

void BM_AssembleGaussianVortex(benchmark::State& state) {
    const auto cfg = parse_config(default_config("gaussian_vortex"));
    const auto system = make_continuous_system("gaussian_vortex", cfg.parameters);
    const auto basis = cfg.basis();
    const auto grid = cfg.quadrature_grid();
    const int threads = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(assemble_generator(system, basis, grid, threads));
}
BENCHMARK(BM_AssembleGaussianVortex)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_EigRotation(benchmark::State& state) {
    const auto& m = model("rotation");
    for (auto _ : state) benchmark::DoNotOptimize(eig(m.generator));
}
BENCHMARK(BM_EigRotation)->Unit(benchmark::kMillisecond);

void BM_EigDense(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    std::srand(7);
    const Eigen::MatrixXcd A = Eigen::MatrixXcd::Random(n, n);
    for (auto _ : state) benchmark::DoNotOptimize(eig(A));
}
BENCHMARK(BM_EigDense)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_ContinuousEigenoperator(benchmark::State& state) {
    const auto& m = model("rotation");
    const int mode[1] = {1};
    const auto idx = sector_eigenvectors(m.spectrum.eigenvectors, m.basis, mode);
    Eigen::MatrixXcd cols(m.spectrum.eigenvectors.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) cols.col(static_cast<Eigen::Index>(c)) = m.spectrum.eigenvectors.col(idx[c]);
    const auto frame = orthonormalize(cols).frame;
    const auto fiber_grid = m.config.fiber_grid();
    const double s = static_cast<double>(state.range(0)) / 10.0;
    for (auto _ : state)
        benchmark::DoNotOptimize(continuous_eigenoperator(m.system, frame, m.basis, fiber_grid, 0.3, s, 1));
}
BENCHMARK(BM_ContinuousEigenoperator)->Arg(0)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_HatwField(benchmark::State& state) {
    const auto& m = model("gaussian_vortex");
    const auto& ev = m.config.evaluation;
    const auto d = m.config.decomposition.d;
    const Eigen::MatrixXcd vectors = m.spectrum.eigenvectors.leftCols(static_cast<Eigen::Index>(d));
    const double hs_y = base_flow_map(m.system, ev.y, ev.s, 200);
    const auto target = restrict_at_base(vectors, m.basis, hs_y, d);
    const auto q = test_vector(vectors, m.basis, ev.y, d);
    const auto fiber_basis = m.config.fiber_basis();
    const auto n = static_cast<int>(state.range(0));
    const Grid grid(std::vector<int>{n, n});
    for (auto _ : state) benchmark::DoNotOptimize(hatw_field(m.system, target, ev.y, ev.s, q.coeffs, fiber_basis, grid));
}
BENCHMARK(BM_HatwField)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
