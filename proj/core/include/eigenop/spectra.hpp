#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eigenop/basis.hpp"
#include "eigenop/generator.hpp"

namespace eigenop {

enum class SortRule { solver_order, nearest_target };

std::string to_string(SortRule rule);

struct SpectrumReport {
    Eigen::VectorXcd eigenvalues;
    Eigen::MatrixXcd eigenvectors;     // unit-norm columns
    std::vector<double> residuals;     // ||A v - lambda v|| / ||A||_F, recomputed after the solve
    double tolerance = 0.0;
    SortRule rule = SortRule::solver_order;
    cplx target = 0.0;
    Provenance source = Provenance::composed;
    std::vector<std::size_t> block_sizes;

    std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
    double max_residual() const;
};

struct EigOptions {
    bool detect_blocks = true;
    double structural_zero = 1e-13;  // relative to max |a_ij|
    bool compute_vectors = true;
    int threads = 1;
};

/// Full dense eigendecomposition with a per-pair residual certificate.
/// Throws NumericalError (with residual diagnostics) if the solver fails or any
/// residual exceeds tol.
SpectrumReport eig(const OperatorMatrix& A, double tol = 1e-10, const EigOptions& options = {});
SpectrumReport eig(const Eigen::MatrixXcd& A, double tol = 1e-10, const EigOptions& options = {},
                   Provenance source = Provenance::composed);

/// Eigenvalues only (no certificate), for small compressed operators.
Eigen::VectorXcd eigenvalues(const Eigen::MatrixXcd& A);

/// Ascending |lambda - target|; ties by (Im, Re).
SpectrumReport sort_by_target(SpectrumReport report, cplx target);

/// Connected components of the nonzero pattern of A (symmetrized), each sorted.
std::vector<std::vector<std::size_t>> connected_blocks(const Eigen::MatrixXcd& A, double structural_zero);

/// Rotates v so that its first largest-modulus entry is real positive.
void normalize_phase(Eigen::Ref<Eigen::VectorXcd> v);

/// Greedy minimal-weight matching. Entry i is the index in `computed` matched to
/// expected[i], or -1 if none within tol.
std::vector<long> match_spectra(const std::vector<cplx>& expected, const std::vector<cplx>& computed, double tol);

/// True when every expected value is matched (computed may be larger unless exact_size).
bool spectra_match(const std::vector<cplx>& expected, const std::vector<cplx>& computed, double tol,
                   bool exact_size = true);

double hausdorff_distance(const std::vector<cplx>& a, const std::vector<cplx>& b);

std::vector<cplx> to_list(const Eigen::VectorXcd& v);

}  // namespace eigenop
