#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "eigenop/basis.hpp"
#include "eigenop/generator.hpp"
#include "eigenop/oseledets.hpp"
#include "eigenop/systems.hpp"

namespace eigenop {

struct CocycleMatrix {
    double y = 0.0;
    int i = 0;
    OperatorMatrix matrix;
    double unitarity_defect = 0.0;  // ||W^* W - I||_F
};

/// Ordered product U_{g(y)} U_{g(h(y))} ... U_{g(h^{i-1}(y))}; adjoints along the
/// backward orbit for i < 0.
Eigen::MatrixXcd discrete_w_matrix(const DiscreteSkewMap& map, double y, int i, const KoopmanProvider& koopman);
CocycleMatrix discrete_w(const DiscreteSkewMap& map, double y, int i, const KoopmanProvider& koopman, BasisDescriptor basis);

struct FlowSettings {
    int steps_per_unit_time = 200;
    bool use_closed_form = false;
    int threads = 1;
};

/// (w_s u)(y, z) = u(g_s(y, z)) sampled on the fiber grid.
FieldSample continuous_w_apply(const ContinuousSkewSystem& system, double y, double s, const Eigen::VectorXcd& u,
                               const TruncatedBasis& fiber_basis, const Grid& grid, const FlowSettings& settings = {});

/// Projects u with the subspace at h_s(y), then applies w_s(y).
FieldSample hatw_field(const ContinuousSkewSystem& system, const FiberSubspace& at_hs_y, double y, double s,
                       const Eigen::VectorXcd& u, const TruncatedBasis& fiber_basis, const Grid& grid,
                       const FlowSettings& settings = {});

struct TestVector {
    double y = 0.0;
    std::size_t d = 0;
    Eigen::VectorXcd coeffs;
};

/// q_{y,d}: mean of the first d eigenvectors restricted to base point y.
TestVector test_vector(const Eigen::MatrixXcd& eigvecs, const TruncatedBasis& basis, double y, std::size_t d);

double field_norm(const FieldSample& field);

struct CorrespondenceReport {
    double max_discrepancy = 0.0;
    std::vector<double> discrepancies;  // one per rank-one test function
    std::size_t base_samples = 0;
};

struct CorrespondenceSettings {
    int base_cutoff = 24;
    int test_base_cutoff = 2;
    int test_fiber_cutoff = 3;
    std::size_t tests = 6;
    std::size_t base_samples = 16;
    std::uint64_t seed = 1;
};

/// Compares the product-space Koopman Galerkin matrix of T with the module route
/// v(h(y)) U_{g(y)} u on random rank-one functions v (x) u.
CorrespondenceReport koopman_correspondence_check(const DiscreteSkewMap& map, const DiscreteFiberSpace& fiber,
                                                  const CorrespondenceSettings& settings = {});

/// Time-s map of a flow with one fiber circle, as a discrete skew map on a torus fiber.
DiscreteSkewMap time_s_map(const ContinuousSkewSystem& system, double s, int steps_per_unit_time = 200);

}  // namespace eigenop
