#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "eigenop/basis.hpp"
#include "eigenop/error.hpp"

using namespace eigenop;

namespace {

Eigen::VectorXcd random_coeffs(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXcd c(static_cast<Eigen::Index>(n));
    for (auto& v : c) v = {g(rng), g(rng)};
    return c;
}

}  // namespace

TEST(Basis, EnumerateOneFactor) {
    const auto modes = enumerate_modes(TruncatedBasis({1}));
    ASSERT_EQ(modes.size(), 3u);
    EXPECT_EQ(modes[0].components, std::vector<int>{-1});
    EXPECT_EQ(modes[1].components, std::vector<int>{0});
    EXPECT_EQ(modes[2].components, std::vector<int>{1});
}

TEST(Basis, EnumerateTwoFactorsHasZeroOnce) {
    const auto modes = enumerate_modes(TruncatedBasis({1, 1}));
    ASSERT_EQ(modes.size(), 9u);
    int zeros = 0;
    for (const auto& m : modes) zeros += m.components == std::vector<int>{0, 0};
    EXPECT_EQ(zeros, 1);
}

TEST(Basis, EnumerateThreeFactorsCount) {
    EXPECT_EQ(enumerate_modes(TruncatedBasis::skew(8, {8, 8})).size(), 4913u);
}

TEST(Basis, OrderingIsLexicographicAndInvertible) {
    const TruncatedBasis b = TruncatedBasis::skew(2, {3});
    const auto modes = enumerate_modes(b);
    for (std::size_t i = 1; i < modes.size(); ++i) EXPECT_LT(modes[i - 1].components, modes[i].components);
    for (std::size_t i = 0; i < modes.size(); ++i) EXPECT_EQ(*b.index_of(modes[i].components), i);
    EXPECT_EQ(enumerate_modes(b), modes);
    EXPECT_FALSE(b.index_of(std::vector<int>{3, 0}).has_value());
}

TEST(Basis, FiberBasisDropsBaseFactor) {
    const TruncatedBasis b = TruncatedBasis::skew(2, {3, 1});
    EXPECT_TRUE(b.is_skew());
    EXPECT_EQ(b.fiber_basis().cutoffs(), (std::vector<int>{3, 1}));
    EXPECT_EQ(b.fiber_size(), 21u);
}

TEST(Basis, AnalyzeSingleMode) {
    const TruncatedBasis b({3});
    const Grid g({16});
    const auto c = analyze(sample_field([](auto x) { return std::polar(1.0, x[0]); }, g), b);
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        const cplx expect = b.component(static_cast<std::size_t>(i), 0) == 1 ? 1.0 : 0.0;
        EXPECT_LE(std::abs(c[i] - expect), 1e-12);
    }
}

TEST(Basis, AnalyzeConstant) {
    const TruncatedBasis b({3});
    const auto c = analyze(sample_field([](auto) { return cplx(1.0); }, Grid({16})), b);
    EXPECT_LE(std::abs(c[static_cast<Eigen::Index>(b.index_of_zero())] - 1.0), 1e-12);
    EXPECT_LE((c.norm() - 1.0), 1e-12);
}

TEST(Basis, AnalyzeOutOfBandModeIsZero) {
    const auto c = analyze(sample_field([](auto x) { return std::polar(1.0, 5 * x[0]); }, Grid({16})), TruncatedBasis({3}));
    EXPECT_LE(c.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Basis, AnalyzeRejectsAliasingGrid) {
    EXPECT_THROW(analyze(sample_field([](auto) { return cplx(1.0); }, Grid({6})), TruncatedBasis({3})), ConfigurationError);
}

TEST(Basis, SynthesizeSingleMode) {
    const TruncatedBasis b = TruncatedBasis::skew(2, {2});
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(b.size()));
    c[static_cast<Eigen::Index>(*b.index_of(std::vector<int>{1, 0}))] = 1.0;
    const Grid g({8, 8});
    const auto f = synthesize(c, b, g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        const auto x = g.coordinates(n);
        EXPECT_LE(std::abs(f.values[static_cast<Eigen::Index>(n)] - std::polar(1.0, x[0])), 1e-13);
    }
}

TEST(Basis, SynthesizeZero) {
    const TruncatedBasis b({4});
    const auto f = synthesize(Eigen::VectorXcd::Zero(9), b, Grid({12}));
    EXPECT_EQ(f.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Basis, SynthesizeRejectsLengthMismatch) {
    EXPECT_THROW(synthesize(Eigen::VectorXcd::Zero(4), TruncatedBasis({4}), Grid({12})), ConfigurationError);
}

TEST(Basis, RoundTripRandom) {
    const TruncatedBasis b = TruncatedBasis::skew(4, {3, 2});
    const Grid g = Grid::for_basis(b);
    const auto c = random_coeffs(b.size(), 7);
    const auto back = analyze(synthesize(c, b, g), b);
    EXPECT_LE((back - c).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Basis, ParsevalInBand) {
    const TruncatedBasis b({5, 4});
    const Grid g({13, 11});
    const auto c = random_coeffs(b.size(), 11);
    const auto f = synthesize(c, b, g);
    const double quad = f.values.squaredNorm() * g.weight();
    EXPECT_LE(std::abs(quad - c.squaredNorm()), 1e-12 * c.squaredNorm());
}

TEST(Basis, AnalyzeIsLinear) {
    const TruncatedBasis b({4, 4});
    const Grid g({16, 16});
    const auto f = synthesize(random_coeffs(b.size(), 3), b, g);
    FieldSample h{g, sample_field([](auto x) { return cplx(std::exp(std::cos(x[0])), std::sin(3 * x[1])); }, g).values};
    const cplx a(0.3, -1.2), s(2.0, 0.5);
    FieldSample mix{g, a * f.values + s * h.values};
    const auto lhs = analyze(mix, b);
    const auto rhs = a * analyze(f, b) + s * analyze(h, b);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Basis, EvaluateMatchesSynthesis) {
    const TruncatedBasis b({3, 2});
    const Grid g({7, 5});
    const auto c = random_coeffs(b.size(), 5);
    const auto f = synthesize(c, b, g);
    for (std::size_t n = 0; n < g.size(); ++n)
        EXPECT_LE(std::abs(evaluate(c, b, g.coordinates(n)) - f.values[static_cast<Eigen::Index>(n)]), 1e-12);
}

TEST(Basis, ModeDerivative) {
    EXPECT_EQ(mode_derivative({{3}}, 0), cplx(0, 3));
    EXPECT_EQ(mode_derivative({{0, 2}}, 1), cplx(0, 2));
    EXPECT_EQ(mode_derivative({{-1, 4}}, 0), cplx(0, -1));
}

TEST(Basis, GridWeightsSumToOne) {
    const Grid g({5, 7, 3});
    EXPECT_NEAR(g.weight() * static_cast<double>(g.size()), 1.0, 1e-15);
    const auto x = g.coordinates(g.size() - 1);
    EXPECT_NEAR(x[2], 2 * std::numbers::pi * 2 / 3, 1e-15);
}

TEST(Basis, PairwiseSumIsDeterministic) {
    std::vector<double> v(1000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + static_cast<double>(i));
    EXPECT_EQ(pairwise_sum(v), pairwise_sum(v));
}
