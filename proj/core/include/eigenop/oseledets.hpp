#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eigenop/basis.hpp"
#include "eigenop/generator.hpp"
#include "eigenop/systems.hpp"

namespace eigenop {

enum class SubspaceOrigin { restricted_eigvecs, spectral_bin };

std::string to_string(SubspaceOrigin origin);

struct FiberSubspace {
    double y = 0.0;
    Eigen::MatrixXcd frame;       // orthonormal columns in fiber-coefficient space
    Eigen::MatrixXcd projection;  // frame * frame^*
    SubspaceOrigin origin = SubspaceOrigin::restricted_eigvecs;
    BasisDescriptor basis;
    std::size_t requested_rank = 0;
    std::vector<std::size_t> dropped;
    std::vector<std::string> warnings;

    std::size_t effective_rank() const { return static_cast<std::size_t>(frame.cols()); }
    std::size_t ambient_size() const { return static_cast<std::size_t>(projection.rows()); }
    OperatorMatrix projection_operator() const;
};

struct Orthonormalization {
    Eigen::MatrixXcd frame;
    std::vector<std::size_t> kept;
    std::vector<std::size_t> dropped;
};

/// Modified Gram-Schmidt with one reorthogonalization pass. A column is dropped when
/// its remaining norm is at most rank_tol times the largest input column norm.
Orthonormalization orthonormalize(const Eigen::MatrixXcd& columns, double rank_tol = 1e-8);

FiberSubspace make_subspace(double y, const Eigen::MatrixXcd& columns, SubspaceOrigin origin, BasisDescriptor basis,
                            double rank_tol = 1e-8);

/// Fiber coefficients a_j = sum_k c_{k,j} e^{iky} of a full (base, fiber) coefficient vector.
Eigen::VectorXcd restrict_vector(const Eigen::VectorXcd& full, const TruncatedBasis& basis, double y);
Eigen::MatrixXcd restrict_columns(const Eigen::MatrixXcd& full, const TruncatedBasis& basis, double y);

/// Span of the first d restricted eigenvectors at base point y.
FiberSubspace restrict_at_base(const Eigen::MatrixXcd& eigvecs, const TruncatedBasis& basis, double y, std::size_t d);

struct SpectralArc {
    double begin = 0.0;  // inclusive
    double end = 0.0;    // exclusive
};

/// Union of half-open arcs of [0, 2pi).
struct SpectralBin {
    std::vector<SpectralArc> arcs;

    bool contains(double phase) const;
    double boundary_distance(double phase) const;
    double measure() const;
};

double normalize_phase_angle(double phase);

/// `count` bins per period 2pi/period, each repeated in every period. `offset`
/// shifts all cut points.
std::vector<SpectralBin> periodic_bins(std::size_t count, int period, double offset = 0.0);

/// Bins bounded by consecutive cut points (sorted values in [0, 2pi/period)), each
/// repeated in every period. The last bin wraps around.
std::vector<SpectralBin> bins_from_cuts(std::vector<double> cuts, int period);

SpectralBin full_circle();

/// True when the bins are pairwise disjoint and cover [0, 2pi).
bool is_partition(const std::vector<SpectralBin>& bins, double tol = 1e-12);

using KoopmanProvider = std::function<Eigen::MatrixXcd(double)>;

KoopmanProvider koopman_provider(const DiscreteSkewMap& map, const DiscreteFiberSpace& fiber);

/// Block-cyclic operator U(y): block row b holds U_{g(h^{b+1}(y))} in block column (b+1) mod n.
Eigen::MatrixXcd block_operator(const DiscreteSkewMap& map, double y, const KoopmanProvider& koopman);

struct BlockSpectralData {
    double y = 0.0;
    int period = 0;
    std::size_t block = 0;
    Eigen::MatrixXcd schur_vectors;
    Eigen::VectorXcd eigenvalues;
    Eigen::VectorXd phases;  // in [0, 2pi)
    double normality_defect = 0.0;
};

BlockSpectralData block_spectral_data(const DiscreteSkewMap& map, double y, const KoopmanProvider& koopman);

/// Ranges of P_k E(y)(T) for k = 1..n (index k-1).
std::vector<FiberSubspace> block_components(const BlockSpectralData& data, const SpectralBin& bin, BasisDescriptor basis,
                                            std::vector<std::string>* warnings = nullptr);

struct PeriodicDecomposition {
    std::vector<double> orbit;                          // y, h(y), ..., h^{n-1}(y)
    std::vector<std::vector<FiberSubspace>> subspaces;  // [bin][k] = V_bin(h^k(y))
    std::vector<std::string> warnings;
};

PeriodicDecomposition periodic_subspaces(const DiscreteSkewMap& map, double y, const KoopmanProvider& koopman,
                                         const std::vector<SpectralBin>& bins, BasisDescriptor basis);

/// Subspace V_bin(y) alone.
FiberSubspace periodic_subspace_at(const DiscreteSkewMap& map, double y, const KoopmanProvider& koopman,
                                   const SpectralBin& bin, BasisDescriptor basis);

/// ||(I - p(y)) U p(h(y))|| in the operator 2-norm.
double equivariance_residual(const FiberSubspace& at_hy, const FiberSubspace& at_y, const Eigen::MatrixXcd& U);

double operator_norm(const Eigen::MatrixXcd& A);

/// Largest principal angle between the column spans of two orthonormal frames
/// (pi/2 when the dimensions differ).
double max_principal_angle(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B);

}  // namespace eigenop
