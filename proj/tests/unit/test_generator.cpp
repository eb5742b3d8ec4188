#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "eigenop/basis.hpp"
#include "eigenop/error.hpp"
#include "eigenop/generator.hpp"
#include "eigenop/systems.hpp"

using namespace eigenop;

namespace {

constexpr double pi = std::numbers::pi;
const cplx I{0.0, 1.0};

Eigen::MatrixXcd rotation_generator(double alpha, double beta, int K) {
    const auto b = TruncatedBasis::skew(K, {K});
    return assemble_generator(make_rotation(alpha, beta), b, Grid::for_basis(b)).matrix.entries;
}

}  // namespace

TEST(Generator, RotationWithoutModulationIsDiagonal) {
    const int K = 4;
    const auto b = TruncatedBasis::skew(K, {K});
    const auto V = rotation_generator(0.7, 0.0, K);
    for (Eigen::Index r = 0; r < V.rows(); ++r)
        for (Eigen::Index c = 0; c < V.cols(); ++c) {
            const int k = b.component(static_cast<std::size_t>(c), 0), j = b.component(static_cast<std::size_t>(c), 1);
            const cplx expect = r == c ? I * (k + 0.7 * j) : 0.0;
            EXPECT_LE(std::abs(V(r, c) - expect), 1e-13);
        }
}

TEST(Generator, RotationCouplingPattern) {
    const int K = 4;
    const double alpha = 0.7, beta = 0.5;
    const auto b = TruncatedBasis::skew(K, {K});
    const auto V = rotation_generator(alpha, beta, K);
    for (Eigen::Index r = 0; r < V.rows(); ++r)
        for (Eigen::Index c = 0; c < V.cols(); ++c) {
            const int k = b.component(static_cast<std::size_t>(c), 0), j = b.component(static_cast<std::size_t>(c), 1);
            const int kr = b.component(static_cast<std::size_t>(r), 0), jr = b.component(static_cast<std::size_t>(r), 1);
            // Oracle: <e^{ik'y}, cos y e^{iky}> = 1/2 when |k'-k| = 1.
            cplx expect = 0.0;
            if (jr == j && kr == k) expect = I * (k + alpha * j);
            if (jr == j && std::abs(kr - k) == 1) expect = I * (j * alpha * beta / 2.0);
            EXPECT_LE(std::abs(V(r, c) - expect), 1e-13) << r << "," << c;
        }
}

TEST(Generator, ZeroModeHasZeroDiagonal) {
    const auto b = TruncatedBasis::skew(4, {4, 4});
    const auto V = assemble_generator(make_gaussian_vortex(0.5), b, Grid::for_basis(b)).matrix.entries;
    const auto z = static_cast<Eigen::Index>(b.index_of_zero());
    EXPECT_LE(std::abs(V(z, z)), 1e-14);
    EXPECT_LE(V.col(z).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Generator, SkewSymmetryRotation) {
    const auto b = TruncatedBasis::skew(8, {8});
    const auto A = assemble_generator(make_rotation(0.7, 0.5), b, Grid::for_basis(b));
    EXPECT_LE(skew_defect_inner(A.matrix, b), 1e-8);
}

TEST(Generator, SkewSymmetryGaussianVortex) {
    const auto b = TruncatedBasis::skew(6, {6, 6});
    const auto A = assemble_generator(make_gaussian_vortex(0.5), b, Grid::for_basis(b));
    EXPECT_LE(skew_defect_inner(A.matrix, b), 1e-4);
}

TEST(Generator, AssemblyIsLinearInVelocity) {
    const auto b = TruncatedBasis::skew(3, {3, 3});
    const Grid g = Grid::for_basis(b);
    const auto s1 = make_gaussian_vortex(0.5);
    const auto s2 = make_stratospheric();
    ContinuousSkewSystem sum = s1;
    sum.base_velocity = [&](double y) { return s1.base_velocity(y) + 2.0 * s2.base_velocity(y); };
    sum.fiber_velocity = [&](double y, const FiberPoint& z) { return FiberPoint(s1.fiber_velocity(y, z) + 2.0 * s2.fiber_velocity(y, z)); };
    const auto a = assemble_generator(s1, b, g).matrix.entries;
    const auto c = assemble_generator(s2, b, g).matrix.entries;
    const auto s = assemble_generator(sum, b, g).matrix.entries;
    EXPECT_LE((s - a - 2.0 * c).cwiseAbs().maxCoeff(), 1e-10 * s.cwiseAbs().maxCoeff());
}

TEST(Generator, AssemblyIsDeterministic) {
    const auto b = TruncatedBasis::skew(3, {3, 3});
    const Grid g = Grid::for_basis(b);
    const auto a = assemble_generator(make_stratospheric(), b, g, 1).matrix.entries;
    const auto c = assemble_generator(make_stratospheric(), b, g, 3).matrix.entries;
    EXPECT_EQ(std::memcmp(a.data(), c.data(), sizeof(cplx) * static_cast<std::size_t>(a.size())), 0);
}

TEST(Generator, RejectsAliasingGrid) {
    const auto b = TruncatedBasis::skew(4, {4});
    EXPECT_THROW(assemble_generator(make_rotation(0.7, 0.5), b, Grid({6, 6})), ConfigurationError);
}

TEST(Generator, SmoothingWeightValues) {
    const TruncatedBasis b({3});
    const auto w = smoothing_weights(b, 0.1, 1.0);
    EXPECT_EQ(w.weights[static_cast<Eigen::Index>(b.index_of_zero())], 1.0);
    EXPECT_NEAR(w.weights[static_cast<Eigen::Index>(*b.index_of(std::vector<int>{1}))], 0.904837418035960, 1e-12);
    for (int m = 0; m < 3; ++m) {
        const auto lo = w.weights[static_cast<Eigen::Index>(*b.index_of(std::vector<int>{m}))];
        const auto hi = w.weights[static_cast<Eigen::Index>(*b.index_of(std::vector<int>{m + 1}))];
        EXPECT_GE(lo, hi);
    }
    const auto k = smoothing_weights(TruncatedBasis({2, 2}), 0.1, 1.0, WeightRule::kernel);
    EXPECT_LE(k.weights.maxCoeff(), 1.0);
    EXPECT_GT(k.weights.minCoeff(), 0.0);
    EXPECT_THROW(smoothing_weights(b, 0.0, 1.0), ConfigurationError);
}

TEST(Generator, SmoothingAlgebra) {
    const auto b = TruncatedBasis::skew(2, {2});
    const auto V = assemble_generator(make_rotation(0.7, 0.0), b, Grid::for_basis(b)).matrix;
    SmoothingWeights ones{1e-3, 1.0, WeightRule::power, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(b.size()))};
    EXPECT_EQ(smoothed_generator(V, ones).entries, V.entries);
    const auto w = smoothing_weights(b, 0.3, 0.5);
    const auto S = smoothed_generator(V, w);
    EXPECT_EQ(S.provenance, Provenance::smoothed_generator);
    for (Eigen::Index i = 0; i < V.entries.rows(); ++i) EXPECT_NEAR(std::abs(S.entries(i, i) - w.weights[i] * V.entries(i, i)), 0.0, 1e-15);
    const auto sym = smoothed_generator(V, w, true);
    EXPECT_LE((sym.entries - S.entries).cwiseAbs().maxCoeff(), 1e-14);  // diagonal V commutes with diag(w)
    EXPECT_THROW(smoothed_generator(V, smoothing_weights(TruncatedBasis({2}), 0.1, 1.0)), ConfigurationError);
}

TEST(Generator, SmoothingConvergesAsTauShrinks) {
    const TruncatedBasis b({4, 4});
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    Eigen::VectorXcd c(static_cast<Eigen::Index>(b.size()));
    for (auto& v : c) v = {g(rng), g(rng)};
    double prev = 1e300;
    for (double tau : {1.0, 0.1, 0.01, 0.001}) {
        const auto w = smoothing_weights(b, tau, 0.1);
        const double e = (w.weights.asDiagonal() * c - c).norm();
        EXPECT_LT(e, prev);
        prev = e;
    }
}

TEST(Generator, RotationFiberKoopmanIsDiagonalPhase) {
    const double alpha = 0.7, beta = 0.5;
    const auto s = make_rotation(alpha, beta);
    const TruncatedBasis fb({6});
    const Grid fg = Grid::for_basis(fb);
    for (bool closed : {true, false}) {
        for (double y : {0.0, 1.3}) {
            const double t = 0.4;
            const auto U = assemble_fiber_koopman(s, y, t, fb, fg, 200, closed).entries;
            for (Eigen::Index r = 0; r < U.rows(); ++r)
                for (Eigen::Index c = 0; c < U.cols(); ++c) {
                    const int j = fb.component(static_cast<std::size_t>(c), 0);
                    const cplx expect = r == c ? std::polar(1.0, j * alpha * (t + beta * (std::sin(y + t) - std::sin(y)))) : 0.0;
                    EXPECT_LE(std::abs(U(r, c) - expect), closed ? 1e-13 : 1e-9);
                }
        }
    }
}

TEST(Generator, FiberKoopmanAtZeroTimeIsIdentity) {
    const TruncatedBasis fb({4, 4});
    const auto U = assemble_fiber_koopman(make_gaussian_vortex(0.5), 0.3, 0.0, fb, Grid::for_basis(fb), 1).entries;
    EXPECT_LE((U - Eigen::MatrixXcd::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Generator, GaussianFiberKoopmanNearUnitaryOnInnerBand) {
    const TruncatedBasis fb({8, 8});
    const auto U = assemble_fiber_koopman(make_gaussian_vortex(0.5), 0.0, 0.1, fb, Grid::for_basis(fb), steps_for(0.1)).entries;
    const auto inner = inner_band(fb);
    const Eigen::MatrixXcd G = U.adjoint() * U;
    double worst = 0.0;
    for (auto r : inner)
        for (auto c : inner) {
            const cplx e = G(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) - (r == c ? 1.0 : 0.0);
            worst = std::max(worst, std::abs(e));
        }
    EXPECT_LE(worst, 1e-6);
}

TEST(Generator, MultiplicationOperators) {
    const TruncatedBasis fb({4});
    const Grid fg({32});
    const auto one = assemble_multiplication([](auto) { return cplx(1.0); }, fb, fg).entries;
    EXPECT_LE((one - Eigen::MatrixXcd::Identity(9, 9)).cwiseAbs().maxCoeff(), 1e-14);
    const auto shift = assemble_multiplication([](auto x) { return std::polar(1.0, x[0]); }, fb, fg).entries;
    for (Eigen::Index r = 0; r < 9; ++r)
        for (Eigen::Index c = 0; c < 9; ++c) EXPECT_LE(std::abs(shift(r, c) - (r == c + 1 ? 1.0 : 0.0)), 1e-14);
}

TEST(Generator, IndicatorMultiplicationMatchesDirectQuadrature) {
    const TruncatedBasis fb({4});
    const int P = 64;
    auto chi = [](double w) { return w < pi ? 1.0 : 0.0; };
    const auto M = assemble_multiplication([&](auto x) { return cplx(chi(x[0])); }, fb, Grid({P})).entries;
    for (Eigen::Index r = 0; r < 9; ++r)
        for (Eigen::Index c = 0; c < 9; ++c) {
            const int d = static_cast<int>(r - c);
            cplx q = 0.0;
            for (int p = 0; p < P; ++p) q += chi(2 * pi * p / P) * std::polar(1.0, -d * 2 * pi * p / P);
            q /= P;
            EXPECT_LE(std::abs(M(r, c) - q), 1e-14);
            // Exact Fourier coefficient of the indicator; quadrature differs by O(1/P).
            const cplx exact = d == 0 ? cplx(0.5) : (1.0 - std::polar(1.0, -pi * d)) / (2.0 * pi * I * static_cast<double>(d));
            EXPECT_LE(std::abs(M(r, c) - exact), 2.0 / P);
        }
}

TEST(Generator, DiscreteTorusKoopmanIsDiagonal) {
    const auto map = make_torus_translation(4, {0.3, 0.5, {}});
    const auto fiber = DiscreteFiberSpace::for_map(map, 5);
    const double y = 0.7;
    const auto U = assemble_fiber_koopman(map, y, fiber).entries;
    for (Eigen::Index r = 0; r < U.rows(); ++r)
        for (Eigen::Index c = 0; c < U.cols(); ++c) {
            const int j = fiber.basis.component(static_cast<std::size_t>(c), 0);
            EXPECT_LE(std::abs(U(r, c) - (r == c ? std::polar(1.0, j * map.shift(y)) : 0.0)), 1e-13);
        }
}

TEST(Generator, DiscreteCyclicKoopmanIsPermutation) {
    const auto map = make_cyclic_group(6, 3, {0, 0, {1, 2, 2}});
    const auto U = assemble_fiber_koopman(map, 0.1, DiscreteFiberSpace::for_map(map, 0)).entries;
    EXPECT_LE((U.adjoint() * U - Eigen::MatrixXcd::Identity(6, 6)).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(U(0, 1), cplx(1.0));
}
