#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eigenop/basis.hpp"
#include "eigenop/generator.hpp"
#include "eigenop/oseledets.hpp"
#include "eigenop/spectra.hpp"
#include "eigenop/systems.hpp"

namespace eigenop {

enum class EigenoperatorKind { discrete_M, continuous_N };

std::string to_string(EigenoperatorKind kind);

struct EigenoperatorSample {
    double y = 0.0;
    OperatorMatrix matrix;  // in the coordinates of the subspace frame
    EigenoperatorKind kind = EigenoperatorKind::continuous_N;
    double time = 0.0;  // i for discrete samples, s for continuous ones
    int j = 0;
    Eigen::VectorXcd eigenvalues;
};

/// Orthonormal frame (in full coefficient space) of every mode whose fiber part is `fiber_mode`.
Eigen::MatrixXcd sector_subspace(const TruncatedBasis& basis, std::span<const int> fiber_mode);

/// Eigenvectors whose fiber-mode content is concentrated on `fiber_mode` (at least `share` of the energy).
std::vector<std::size_t> sector_eigenvectors(const Eigen::MatrixXcd& eigvecs, const TruncatedBasis& basis,
                                             std::span<const int> fiber_mode, double share = 0.5);

/// Time-frozen generator b(y') d/dy + F(y') applied to the columns of Q.
Eigen::MatrixXcd apply_frozen_generator(const ContinuousSkewSystem& system, double y_frozen, const TruncatedBasis& basis,
                                        const Grid& fiber_grid, const Eigen::MatrixXcd& Q);

/// Compression Q^* G_{h_s(y)} Q of the frozen generator onto the subspace spanned by `frame`.
EigenoperatorSample continuous_eigenoperator(const ContinuousSkewSystem& system, const Eigen::MatrixXcd& frame,
                                             const TruncatedBasis& basis, const Grid& fiber_grid, double y, double s,
                                             int j = 0, int steps_per_unit_time = 200);

struct RankOneResult {
    cplx value;
    double norm = 0.0;            // ||v(y, .)|| before renormalization
    double norm_variation = 0.0;  // (max - min) / max over the base sample
    bool norm_constant = true;    // variation within 2%
    std::vector<std::string> warnings;
};

/// Quadrature of sum_d (dv/dz_d)(y, .) g_d(y, .) conj(v)(y, .) with v(y, .) renormalized.
RankOneResult rank_one_spectrum(const ContinuousSkewSystem& system, const Eigen::VectorXcd& v, const TruncatedBasis& basis,
                                double y, const Grid& fiber_grid, std::size_t norm_samples = 32);

struct AggregatedSpectrum {
    std::vector<cplx> values;
    std::vector<std::size_t> support;  // number of base samples carrying each value
    std::vector<double> y_samples;
    double tolerance = 0.0;
};

/// Tolerance-union of per-sample eigenvalue sets; sorted by (Im, Re).
AggregatedSpectrum aggregate(const std::vector<double>& y_samples, const std::vector<Eigen::VectorXcd>& spectra, double tol);

std::vector<double> equispaced_samples(std::size_t count);

using SpectrumSampler = std::function<Eigen::VectorXcd(double y, double s)>;

struct ShiftInvarianceReport {
    std::vector<double> shifts;
    std::vector<double> distances;
    double max_distance = 0.0;
};

/// Hausdorff distance between the y-aggregated spectra at s and at 0. Each sampled
/// eigenvalue is compared with the other family over the y-continuum, refined by
/// golden-section search around the best sample. The result is an upper bound.
ShiftInvarianceReport shift_invariance_check(const SpectrumSampler& sampler, const std::vector<double>& y_samples,
                                             const std::vector<double>& shifts);

using SubspaceProvider = std::function<FiberSubspace(double y)>;

SubspaceProvider periodic_subspace_provider(const DiscreteSkewMap& map, const KoopmanProvider& koopman, const SpectralBin& bin,
                                            BasisDescriptor basis);

/// M(y) = U_{g(h^i(y))} p_j(h^{i+1}(y)) in the fiber basis.
Eigen::MatrixXcd discrete_eigenoperator_matrix(const DiscreteSkewMap& map, const KoopmanProvider& koopman,
                                               const SubspaceProvider& subspaces, int i, double y);

/// Compression F^* U_{g(h^i y)} F with F = frame(h^{i+1} y); its eigenvalues are the
/// nonzero spectrum of U_{g(h^i y)} p_j(h^{i+1} y).
EigenoperatorSample discrete_eigenoperator(const DiscreteSkewMap& map, const KoopmanProvider& koopman,
                                           const SubspaceProvider& subspaces, int i, int j, double y);

struct DiscreteSpectrumReport {
    AggregatedSpectrum spectrum;
    std::vector<EigenoperatorSample> samples;
    double max_unit_circle_defect = 0.0;
};

DiscreteSpectrumReport discrete_eigenoperator_spectrum(const DiscreteSkewMap& map, const KoopmanProvider& koopman,
                                                       const SubspaceProvider& subspaces, int i, int j,
                                                       const std::vector<double>& y_samples, double tol = 1e-8);

/// ||w_i p_j(h^i y) M(y) - w_{i+1} p_j(h^{i+1} y)||_F.
double discrete_identity_residual(const DiscreteSkewMap& map, const KoopmanProvider& koopman,
                                  const SubspaceProvider& subspaces, int i, double y);

}  // namespace eigenop
