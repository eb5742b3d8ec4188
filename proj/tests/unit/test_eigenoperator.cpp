#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eigenop/eigenoperator.hpp"
#include "eigenop/error.hpp"
#include "eigenop/oracles.hpp"
#include "eigenop/spectra.hpp"

using namespace eigenop;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double alpha = 0.7, beta = 0.5;

double nearest(const Eigen::VectorXcd& set, cplx z) {
    double best = 1e300;
    for (const auto& w : set) best = std::min(best, std::abs(w - z));
    return best;
}

struct RotationSetup {
    ContinuousSkewSystem system = make_rotation(alpha, beta);
    TruncatedBasis basis = TruncatedBasis::skew(8, {8});
    Grid fiber_grid{std::vector<int>{32}};
};

}  // namespace

TEST(Eigenoperator, RotationSectorSpectrum) {
    RotationSetup r;
    for (int j : {1, 2})
        for (double y : {0.0, pi / 2.0, pi}) {
            const int mode[] = {j};
            const auto Q = sector_subspace(r.basis, mode);
            const auto sample = continuous_eigenoperator(r.system, Q, r.basis, r.fiber_grid, y, 0.0, j);
            EXPECT_EQ(sample.matrix.entries.rows(), 17);
            for (int k = -4; k <= 4; ++k)
                EXPECT_LE(nearest(sample.eigenvalues, rotation_oracle(alpha, beta, k, j, y, 0.0).eigenvalue), 1e-8);
            for (const auto& z : sample.eigenvalues) EXPECT_LE(std::abs(z.real()), 1e-8);
        }
}

TEST(Eigenoperator, ConstantFiberModeHasZeroInSpectrum) {
    RotationSetup r;
    const int mode[] = {0};
    const auto sample = continuous_eigenoperator(r.system, sector_subspace(r.basis, mode), r.basis, r.fiber_grid, 1.0, 0.0);
    EXPECT_LE(nearest(sample.eigenvalues, 0.0), 1e-12);
}

TEST(Eigenoperator, UnmodulatedRotationIsBaseIndependent) {
    const auto system = make_rotation(alpha, 0.0);
    const auto basis = TruncatedBasis::skew(4, {4});
    const Grid grid({16});
    const int mode[] = {2};
    const auto Q = sector_subspace(basis, mode);
    const auto a = continuous_eigenoperator(system, Q, basis, grid, 0.3, 0.0);
    const auto b = continuous_eigenoperator(system, Q, basis, grid, 2.1, 0.0);
    EXPECT_LE((a.matrix.entries - b.matrix.entries).norm(), 1e-13);
}

TEST(Eigenoperator, RankOneRotationEigenfields) {
    RotationSetup r;
    const auto V = assemble_generator(r.system, r.basis, Grid::for_basis(r.basis)).matrix;
    const auto spec = eig(V);
    for (int j : {1, 2})
        for (int k : {0, 1, -1}) {
            const cplx target = rotation_generator_eigenvalue(alpha, k, j);
            Eigen::Index best = 0;
            for (Eigen::Index i = 1; i < spec.eigenvalues.size(); ++i)
                if (std::abs(spec.eigenvalues(i) - target) < std::abs(spec.eigenvalues(best) - target)) best = i;
            ASSERT_LE(std::abs(spec.eigenvalues(best) - target), 1e-8);
            const Eigen::VectorXcd v = spec.eigenvectors.col(best);
            for (int m = 0; m < 64; ++m) {
                const double y = 2.0 * pi * m / 64.0;
                const auto res = rank_one_spectrum(r.system, v, r.basis, y, r.fiber_grid);
                EXPECT_TRUE(res.norm_constant);
                EXPECT_LE(std::abs(res.value.real()), 1e-8);
                EXPECT_LE(std::abs(res.value - cplx(0.0, j * alpha * (1.0 + beta * std::cos(y)))), 1e-8);
            }
        }
}

TEST(Eigenoperator, RankOneOfFiberConstantIsZero) {
    const auto system = make_gaussian_vortex(0.5);
    const auto basis = TruncatedBasis::skew(2, {3, 3});
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
    const int m[] = {0, 0, 0};
    v(static_cast<Eigen::Index>(*basis.index_of(m))) = 2.0;
    const auto res = rank_one_spectrum(system, v, basis, 0.4, Grid({16, 16}));
    EXPECT_LE(std::abs(res.value), 1e-14);
    EXPECT_NEAR(res.norm, 2.0, 1e-14);
}

TEST(Eigenoperator, RankOneRejectsDegenerateVector) {
    RotationSetup r;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(r.basis.size()));
    EXPECT_THROW(rank_one_spectrum(r.system, v, r.basis, 0.0, r.fiber_grid), NumericalError);
}

TEST(Eigenoperator, RankOneFlagsVaryingNorm) {
    RotationSetup r;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(r.basis.size()));
    const int a[] = {0, 1}, b[] = {1, 1};
    v(static_cast<Eigen::Index>(*r.basis.index_of(a))) = 1.0;
    v(static_cast<Eigen::Index>(*r.basis.index_of(b))) = 0.5;
    const auto res = rank_one_spectrum(r.system, v, r.basis, 0.0, r.fiber_grid);
    EXPECT_FALSE(res.norm_constant);
    EXPECT_FALSE(res.warnings.empty());
}

TEST(Eigenoperator, AggregateCountsSupport) {
    Eigen::VectorXcd a(2), b(2), c(1);
    a << cplx(0, 1), cplx(0, 2);
    b << cplx(0, 1 + 1e-12), cplx(0, 3);
    c << cplx(0, 1);
    const auto agg = aggregate({0.0, 1.0, 2.0}, {a, b, c}, 1e-9);
    ASSERT_EQ(agg.values.size(), 3u);
    EXPECT_EQ(agg.support, (std::vector<std::size_t>{3, 1, 1}));
    EXPECT_NEAR(agg.values[2].imag(), 3.0, 0.0);
}

TEST(Eigenoperator, RotationShiftInvariance) {
    RotationSetup r;
    const int mode[] = {1};
    const auto Q = sector_subspace(r.basis, mode);
    const SpectrumSampler sampler = [&](double y, double s) {
        return continuous_eigenoperator(r.system, Q, r.basis, r.fiber_grid, y, s).eigenvalues;
    };
    const auto report = shift_invariance_check(sampler, equispaced_samples(64), {0.1, 0.5, 1.0});
    ASSERT_EQ(report.distances.size(), 3u);
    EXPECT_LE(report.max_distance, 1e-6);
    const auto single = shift_invariance_check(sampler, {0.3}, {0.5});
    EXPECT_GT(single.max_distance, 1e-3);
}

TEST(Eigenoperator, ZeroModeShiftInvarianceIsExact) {
    RotationSetup r;
    const int mode[] = {0};
    const auto Q = sector_subspace(r.basis, mode);
    const SpectrumSampler sampler = [&](double y, double s) {
        return continuous_eigenoperator(r.system, Q, r.basis, r.fiber_grid, y, s).eigenvalues;
    };
    EXPECT_LE(shift_invariance_check(sampler, equispaced_samples(8), {0.5}).max_distance, 1e-12);
}

TEST(Eigenoperator, CyclicCharacterSpectrum) {
    const ShiftFunction shift{0.0, 0.0, {1.0, 2.0, 2.0}};
    const auto map = make_cyclic_group(6, 3, shift);
    const auto fiber = DiscreteFiberSpace::for_map(map, 0);
    const auto koopman = koopman_provider(map, fiber);
    // eigenphases of the block operator sit on multiples of pi/9; cut halfway between them
    const auto bins = periodic_bins(6, 3, pi / 18.0);
    // chi_1 collects e^{2 pi i 5/6} around the orbit, whose cube roots include phase 5 pi / 9
    std::size_t chi1 = bins.size();
    for (std::size_t b = 0; b < bins.size(); ++b)
        if (bins[b].contains(5.0 * pi / 9.0)) chi1 = b;
    ASSERT_LT(chi1, bins.size());
    const auto sub = periodic_subspace_provider(map, koopman, bins[chi1], fiber.descriptor());
    const auto ys = equispaced_samples(64);
    for (int i : {0, 1, -1}) {
        const auto report = discrete_eigenoperator_spectrum(map, koopman, sub, i, 1, ys);
        EXPECT_LE(report.max_unit_circle_defect, 1e-8);
        std::vector<cplx> expect;
        for (double v : {1.0, 2.0}) expect.push_back(std::polar(1.0, 2.0 * pi * v / 6.0));
        ASSERT_EQ(report.spectrum.values.size(), 2u);
        for (const auto& e : expect) {
            double d = 1e300;
            for (const auto& z : report.spectrum.values) d = std::min(d, std::abs(z - e));
            EXPECT_LE(d, 1e-10);
        }
    }
}

TEST(Eigenoperator, IdentityFiberMapGivesOne) {
    const auto map = make_cyclic_group(4, 2, ShiftFunction{0.0, 0.0, {}});
    const auto fiber = DiscreteFiberSpace::for_map(map, 0);
    const auto koopman = koopman_provider(map, fiber);
    const auto sub = periodic_subspace_provider(map, koopman, full_circle(), fiber.descriptor());
    const auto report = discrete_eigenoperator_spectrum(map, koopman, sub, 0, 0, equispaced_samples(8));
    ASSERT_EQ(report.spectrum.values.size(), 1u);
    EXPECT_LE(std::abs(report.spectrum.values[0] - 1.0), 1e-12);
    EXPECT_EQ(report.spectrum.support[0], 8u);
}

TEST(Eigenoperator, TwoValuedTorusShift) {
    const double a = 0.4, b = 1.1;
    const int n = 4;
    const auto map = make_torus_translation(n, ShiftFunction{0.0, 0.0, {a, b}});
    const auto fiber = DiscreteFiberSpace::for_map(map, 3);
    const auto koopman = koopman_provider(map, fiber);
    const auto bins = periodic_bins(2, n, 0.05);
    const double total = 2.0 * (a + b);  // each orbit visits both arcs twice
    const auto ys = equispaced_samples(16);
    for (const auto& bin : bins) {
        std::vector<int> modes;
        for (int j = -3; j <= 3; ++j)
            if (bin.contains(normalize_phase_angle(j * total) / n)) modes.push_back(j);
        const auto sub = periodic_subspace_provider(map, koopman, bin, fiber.descriptor());
        const auto report = discrete_eigenoperator_spectrum(map, koopman, sub, 1, 0, ys);
        std::vector<cplx> expect;
        for (int j : modes)
            for (double v : {a, b}) expect.push_back(std::polar(1.0, j * v));
        EXPECT_LE(report.max_unit_circle_defect, 1e-10);
        for (const auto& e : expect) {
            double d = 1e300;
            for (const auto& z : report.spectrum.values) d = std::min(d, std::abs(z - e));
            EXPECT_LE(d, 1e-10);
        }
        for (const auto& z : report.spectrum.values) {
            double d = 1e300;
            for (const auto& e : expect) d = std::min(d, std::abs(z - e));
            EXPECT_LE(d, 1e-10);
        }
    }
}

TEST(Eigenoperator, DiscreteIdentityHolds) {
    const auto maps = {make_torus_translation(4, ShiftFunction{0.3, 0.5, {}}),
                       make_cyclic_group(6, 3, ShiftFunction{0.0, 0.0, {1.0, 2.0, 2.0}})};
    for (const auto& map : maps) {
        const auto fiber = DiscreteFiberSpace::for_map(map, 4);
        const auto koopman = koopman_provider(map, fiber);
        for (const auto& bin : periodic_bins(3, *map.base_period, 0.1)) {
            const auto sub = periodic_subspace_provider(map, koopman, bin, fiber.descriptor());
            for (int i = -2; i <= 2; ++i) EXPECT_LE(discrete_identity_residual(map, koopman, sub, i, 0.8), 1e-8) << map.name;
        }
    }
}
