#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "eigenop/basis.hpp"
#include "eigenop/error.hpp"
#include "eigenop/generator.hpp"
#include "eigenop/spectra.hpp"
#include "eigenop/systems.hpp"

using namespace eigenop;

namespace {

const cplx I{0.0, 1.0};

// det(A) by permutation expansion; independent of any factorization.
cplx brute_det(const Eigen::MatrixXcd& A) {
    const int n = static_cast<int>(A.rows());
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    cplx total = 0.0;
    do {
        int inversions = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) inversions += perm[i] > perm[j];
        cplx term = inversions % 2 ? -1.0 : 1.0;
        for (int i = 0; i < n; ++i) term *= A(i, perm[i]);
        total += term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

// Roots of det(lambda I - A) by simultaneous Newton (Weierstrass) iteration.
std::vector<cplx> characteristic_roots(const Eigen::MatrixXcd& A) {
    const auto n = A.rows();
    auto p = [&](cplx l) { return brute_det(l * Eigen::MatrixXcd::Identity(n, n) - A); };
    std::vector<cplx> z(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = std::pow(cplx(0.4, 0.9), static_cast<double>(i)) * 2.0;
    for (int it = 0; it < 500; ++it) {
        for (std::size_t i = 0; i < z.size(); ++i) {
            cplx denom = 1.0;
            for (std::size_t j = 0; j < z.size(); ++j)
                if (j != i) denom *= z[i] - z[j];
            z[i] -= p(z[i]) / denom;
        }
    }
    return z;
}

Eigen::MatrixXcd random_matrix(Eigen::Index n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXcd A(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = 0; r < n; ++r) A(r, c) = {g(rng), g(rng)};
    return A;
}

}  // namespace

TEST(Spectra, Identity) {
    const auto rep = eig(Eigen::MatrixXcd::Identity(5, 5));
    for (auto l : rep.eigenvalues) EXPECT_EQ(l, cplx(1.0));
    for (double r : rep.residuals) EXPECT_EQ(r, 0.0);
}

TEST(Spectra, Diagonal) {
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(3, 3);
    A.diagonal() << 1.0, 2.0, 3.0;
    EXPECT_TRUE(spectra_match({1.0, 2.0, 3.0}, to_list(eig(A).eigenvalues), 1e-14));
}

TEST(Spectra, RandomMatrixMatchesCharacteristicPolynomial) {
    const auto A = random_matrix(4, 2024);
    const auto rep = eig(A);
    EXPECT_TRUE(spectra_match(characteristic_roots(A), to_list(rep.eigenvalues), 1e-8));
    for (Eigen::Index k = 0; k < 4; ++k) {
        const Eigen::VectorXcd v = rep.eigenvectors.col(k);
        EXPECT_NEAR(v.norm(), 1.0, 1e-14);
        EXPECT_LE((A * v - rep.eigenvalues[k] * v).norm() / A.norm(), 1e-12);
    }
}

TEST(Spectra, SimilarityInvariance) {
    const auto A = random_matrix(12, 3);
    std::vector<int> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(8);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(12, 12);
    for (int i = 0; i < 12; ++i) P(i, perm[static_cast<std::size_t>(i)]) = 1.0;
    const Eigen::MatrixXcd B = P * A * P.transpose();
    EXPECT_TRUE(spectra_match(to_list(eig(A).eigenvalues), to_list(eig(B).eigenvalues), 1e-8));
}

TEST(Spectra, SortRuleTies) {
    SpectrumReport rep;
    rep.eigenvalues.resize(3);
    rep.eigenvalues << I, 2.0 * I, -I;
    const auto sorted = sort_by_target(rep, 1e-10);
    EXPECT_EQ(sorted.eigenvalues[0], -I);
    EXPECT_EQ(sorted.eigenvalues[1], I);
    EXPECT_EQ(sorted.eigenvalues[2], 2.0 * I);
    EXPECT_EQ(sorted.rule, SortRule::nearest_target);
    EXPECT_EQ(sort_by_target(SpectrumReport{}, 1e-10).size(), 0u);
}

TEST(Spectra, RotationNearestToTargetIsZeroMode) {
    const auto b = TruncatedBasis::skew(2, {2});
    const auto V = assemble_generator(make_rotation(0.7, 0.0), b, Grid::for_basis(b)).matrix;
    const auto rep = sort_by_target(eig(V), 1e-10);
    EXPECT_LE(std::abs(rep.eigenvalues[0]), 1e-14);
    const Eigen::VectorXcd v = rep.eigenvectors.col(0);
    EXPECT_NEAR(std::abs(v[static_cast<Eigen::Index>(b.index_of_zero())]), 1.0, 1e-12);
}

TEST(Spectra, BlockDetectionPreservesSpectrum) {
    const auto A1 = random_matrix(5, 1), A2 = random_matrix(4, 2);
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(9, 9);
    const std::vector<int> first{0, 2, 4, 6, 8}, second{1, 3, 5, 7};
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) A(first[r], first[c]) = A1(r, c);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) A(second[r], second[c]) = A2(r, c);
    const auto blocks = connected_blocks(A, 1e-13);
    ASSERT_EQ(blocks.size(), 2u);
    EXPECT_EQ(blocks[0], (std::vector<std::size_t>{0, 2, 4, 6, 8}));
    EigOptions dense;
    dense.detect_blocks = false;
    const auto a = eig(A), b = eig(A, 1e-10, dense);
    EXPECT_TRUE(spectra_match(to_list(a.eigenvalues), to_list(b.eigenvalues), 1e-10));
    for (Eigen::Index k = 0; k < 9; ++k) {
        const Eigen::VectorXcd v = a.eigenvectors.col(k);
        EXPECT_LE((A * v - a.eigenvalues[k] * v).norm() / A.norm(), 1e-12);
    }
}

TEST(Spectra, ResidualCertificateFailureCarriesDiagnostics) {
    // A Jordan block is defective; an absurd tolerance forces the certificate to fail.
    Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(6, 6);
    for (int i = 0; i < 5; ++i) J(i, i + 1) = 1.0;
    try {
        eig(J, 0.0);
        SUCCEED();
    } catch (const NumericalError& e) {
        EXPECT_EQ(e.diagnostics().size(), 6u);
    }
}

TEST(Spectra, PhaseNormalizationIsDeterministic) {
    Eigen::VectorXcd v(3);
    v << cplx(0.0, 2.0), cplx(1.0, 0.0), cplx(0.0, -2.0);
    normalize_phase(v);
    EXPECT_NEAR(v.norm(), 1.0, 1e-15);
    EXPECT_EQ(v[0].imag(), 0.0);
    EXPECT_GT(v[0].real(), 0.0);
}

TEST(Spectra, MatchingAndHausdorff) {
    const std::vector<cplx> a{0.0, 1.0, 1.0}, b{1.0 + 1e-9, 0.0, 1.0 - 1e-9};
    EXPECT_TRUE(spectra_match(a, b, 1e-8));
    EXPECT_FALSE(spectra_match(a, {0.0, 1.0, 2.0}, 1e-8));
    EXPECT_NEAR(hausdorff_distance({0.0, 1.0}, {0.0, 1.5}), 0.5, 1e-15);
    EXPECT_EQ(hausdorff_distance({}, {}), 0.0);
}
