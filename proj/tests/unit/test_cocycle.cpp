#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "eigenop/cocycle.hpp"
#include "eigenop/error.hpp"
#include "eigenop/oracles.hpp"

using namespace eigenop;

namespace {

constexpr double pi = std::numbers::pi;

Eigen::VectorXcd fiber_mode(const TruncatedBasis& fb, int j) {
    Eigen::VectorXcd u = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(fb.size()));
    const int m[] = {j};
    u(static_cast<Eigen::Index>(*fb.index_of(m))) = 1.0;
    return u;
}

}  // namespace

TEST(Cocycle, DiscreteZeroStepIsIdentity) {
    const auto map = make_torus_translation(4, ShiftFunction{0.3, 0.5, {}});
    const auto fiber = DiscreteFiberSpace::for_map(map, 4);
    const auto W = discrete_w(map, 0.7, 0, koopman_provider(map, fiber), fiber.descriptor());
    EXPECT_EQ((W.matrix.entries - Eigen::MatrixXcd::Identity(9, 9)).norm(), 0.0);
}

TEST(Cocycle, TorusProductOfPhases) {
    const ShiftFunction shift{0.3, 0.5, {}};
    const auto map = make_torus_translation(4, shift);
    const auto fiber = DiscreteFiberSpace::for_map(map, 4);
    const auto provider = koopman_provider(map, fiber);
    const double y = 0.7;
    for (int i : {1, 2, 3, 5}) {
        const auto W = discrete_w(map, y, i, provider, fiber.descriptor());
        double total = 0.0;
        for (int k = 0; k < i; ++k) total += shift(y + 2.0 * pi * k / 4.0);
        for (std::size_t idx = 0; idx < fiber.size(); ++idx) {
            const int j = fiber.basis.component(idx, 0);
            const auto e = static_cast<Eigen::Index>(idx);
            EXPECT_LE(std::abs(W.matrix.entries(e, e) - std::polar(1.0, j * total)), 1e-12);
        }
        EXPECT_LE(W.unitarity_defect, 1e-12);
    }
}

TEST(Cocycle, DiscreteRecursion) {
    const auto maps = {make_torus_translation(4, ShiftFunction{0.3, 0.5, {}}),
                       make_cyclic_group(6, 3, ShiftFunction{0.0, 0.0, {1.0, 2.0, 2.0}})};
    for (const auto& map : maps) {
        const auto fiber = DiscreteFiberSpace::for_map(map, 4);
        const auto provider = koopman_provider(map, fiber);
        const double y = 1.3;
        for (int i = -3; i <= 3; ++i) {
            const Eigen::MatrixXcd lhs = discrete_w_matrix(map, y, i, provider) * provider(base_iterate(map, y, i));
            const Eigen::MatrixXcd rhs = discrete_w_matrix(map, y, i + 1, provider);
            EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10) << map.name << " i=" << i;
        }
    }
}

TEST(Cocycle, RotationPhaseMatchesClosedForm) {
    const double alpha = 0.7, beta = 0.5;
    const auto system = make_rotation(alpha, beta);
    const TruncatedBasis fb({4});
    const Grid grid({16});
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> Y(0.0, 2.0 * pi), S(0.0, 2.0);
    std::uniform_int_distribution<int> J(-4, 4);
    for (int t = 0; t < 20; ++t) {
        const double y = Y(rng), s = S(rng);
        const int j = J(rng);
        const auto field = continuous_w_apply(system, y, s, fiber_mode(fb, j), fb, grid);
        const cplx phase = rotation_oracle(alpha, beta, 0, j, y, s).phase;
        for (std::size_t n = 0; n < grid.size(); ++n) {
            const double z = grid.node(0, static_cast<int>(n));
            EXPECT_LE(std::abs(field.values[static_cast<Eigen::Index>(n)] - std::polar(1.0, j * z) * phase), 1e-8);
        }
    }
}

TEST(Cocycle, ZeroTimeLeavesFieldUnchanged) {
    const auto system = make_gaussian_vortex(0.5);
    const TruncatedBasis fb({3, 3});
    const Grid grid({12, 12});
    Eigen::VectorXcd u = Eigen::VectorXcd::LinSpaced(static_cast<Eigen::Index>(fb.size()), 0.0, 1.0);
    const auto field = continuous_w_apply(system, 0.4, 0.0, u, fb, grid);
    const auto expect = synthesize(u, fb, grid);
    EXPECT_LE((field.values - expect.values).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Cocycle, ContinuousGroupProperty) {
    const auto system = make_rotation(0.7, 0.5);
    const TruncatedBasis fb({3});
    const Grid grid({32});
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N;
    Eigen::VectorXcd u(static_cast<Eigen::Index>(fb.size()));
    for (auto& x : u) x = {N(rng), N(rng)};
    const double y = 0.9, s = 0.4, t = 0.7;
    const double hy = base_flow_map(system, y, s, steps_for(s));
    const Eigen::VectorXcd later = analyze(continuous_w_apply(system, hy, t, u, fb, grid), fb);
    const auto composed = continuous_w_apply(system, y, s, later, fb, grid);
    const auto direct = continuous_w_apply(system, y, s + t, u, fb, grid);
    EXPECT_LE((composed.values - direct.values).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Cocycle, GaussianFlowIsNearIsometric) {
    const auto system = make_gaussian_vortex(0.5);
    const TruncatedBasis fb({3, 3});
    const Grid grid({64, 64});
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N;
    Eigen::VectorXcd u(static_cast<Eigen::Index>(fb.size()));
    for (auto& x : u) x = {N(rng), N(rng)};
    const auto field = continuous_w_apply(system, 0.0, 0.1, u, fb, grid);
    EXPECT_NEAR(field_norm(field) / u.norm(), 1.0, 1e-3);
}

TEST(Cocycle, HatWProjectsFirst) {
    const auto system = make_rotation(0.7, 0.5);
    const TruncatedBasis fb({3});
    const Grid grid({16});
    const double y = 0.2, s = 0.5;
    Eigen::MatrixXcd frame = fiber_mode(fb, 1);
    const auto sub = make_subspace(y + s, frame, SubspaceOrigin::spectral_bin, BasisDescriptor::fourier(fb));
    const auto killed = hatw_field(system, sub, y, s, fiber_mode(fb, 2), fb, grid);
    EXPECT_LE(killed.values.cwiseAbs().maxCoeff(), 1e-15);
    const auto sub0 = make_subspace(y, frame, SubspaceOrigin::spectral_bin, BasisDescriptor::fourier(fb));
    const auto kept = hatw_field(system, sub0, y, 0.0, fiber_mode(fb, 1), fb, grid);
    EXPECT_LE((kept.values - synthesize(fiber_mode(fb, 1), fb, grid).values).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Cocycle, TestVectorIsMeanOfRestrictions) {
    const auto b = TruncatedBasis::skew(1, {1});
    Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(b.size()), 2);
    const int m1[] = {0, 1}, m2[] = {1, -1};
    V(static_cast<Eigen::Index>(*b.index_of(m1)), 0) = 1.0;
    V(static_cast<Eigen::Index>(*b.index_of(m2)), 1) = 1.0;
    const double y = 0.3;
    const auto q = test_vector(V, b, y, 2);
    EXPECT_LE(std::abs(q.coeffs(2) - 0.5), 1e-15);
    EXPECT_LE(std::abs(q.coeffs(0) - 0.5 * std::polar(1.0, y)), 1e-15);
    EXPECT_THROW(test_vector(V, b, y, 3), ConfigurationError);
}

TEST(Cocycle, TorusCorrespondence) {
    const auto map = make_torus_translation(4, ShiftFunction{0.3, 0.5, {}});
    const auto fiber = DiscreteFiberSpace::for_map(map, 4);
    const auto report = koopman_correspondence_check(map, fiber);
    EXPECT_EQ(report.discrepancies.size(), 6u);
    EXPECT_LE(report.max_discrepancy, 1e-10);
}

TEST(Cocycle, IdentityMapCorrespondence) {
    auto map = make_torus_translation(1, ShiftFunction{0.0, 0.0, {}});
    const auto fiber = DiscreteFiberSpace::for_map(map, 3);
    EXPECT_LE((assemble_fiber_koopman(map, 0.4, fiber).entries - Eigen::MatrixXcd::Identity(7, 7)).norm(), 1e-14);
    EXPECT_LE(koopman_correspondence_check(map, fiber).max_discrepancy, 1e-13);
}

TEST(Cocycle, RotationTimeOneCorrespondence) {
    const auto map = time_s_map(make_rotation(0.7, 0.5), 1.0);
    const auto fiber = DiscreteFiberSpace::for_map(map, 4);
    EXPECT_LE(koopman_correspondence_check(map, fiber).max_discrepancy, 1e-6);
}
