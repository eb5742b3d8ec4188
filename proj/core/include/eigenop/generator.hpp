#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eigenop/basis.hpp"
#include "eigenop/systems.hpp"

namespace eigenop {

enum class Provenance { generator, smoothed_generator, fiber_koopman, multiplication, projection, composed };

std::string to_string(Provenance p);

/// Serializable description of the basis on one side of an operator matrix.
struct BasisDescriptor {
    std::string kind;          // fourier | points | lattice
    std::vector<int> extents;  // cutoffs, group order, or window half-width
    std::vector<FactorRole> roles;
    std::size_t size = 0;

    static BasisDescriptor fourier(const TruncatedBasis& basis);
    static BasisDescriptor points(int order);
    static BasisDescriptor lattice(int window);

    bool operator==(const BasisDescriptor&) const = default;
};

struct OperatorMatrix {
    BasisDescriptor rows;
    BasisDescriptor cols;
    Eigen::MatrixXcd entries;
    Provenance provenance = Provenance::composed;
};

struct AssemblyReport {
    double aliasing_indicator = 0.0;
    bool aliasing_warning = false;
    std::vector<std::string> warnings;
};

struct GeneratorAssembly {
    OperatorMatrix matrix;
    AssemblyReport report;
};

GeneratorAssembly assemble_generator(const ContinuousSkewSystem& system, const TruncatedBasis& basis,
                                     const Grid& grid, int threads = 1);

enum class WeightRule { power, kernel };

std::string to_string(WeightRule rule);
WeightRule weight_rule_from_string(const std::string& name);

struct SmoothingWeights {
    double tau = 0.0;
    double p = 1.0;
    WeightRule rule = WeightRule::power;
    Eigen::VectorXd weights;
};

/// power: prod_d exp(-tau |m_d|^p);  kernel: exp(tau (1 - prod_d e^{|m_d|})).
SmoothingWeights smoothing_weights(const TruncatedBasis& basis, double tau, double p, WeightRule rule = WeightRule::power);

/// diag(w) V, or diag(sqrt w) V diag(sqrt w) when symmetric.
OperatorMatrix smoothed_generator(const OperatorMatrix& V, const SmoothingWeights& w, bool symmetric = false);

/// Galerkin matrix of u -> u o g_s(y, .) on the fiber basis.
OperatorMatrix assemble_fiber_koopman(const ContinuousSkewSystem& system, double y, double s,
                                      const TruncatedBasis& fiber_basis, const Grid& fiber_grid, int steps,
                                      bool use_closed_form = true);

/// Function space on the fiber of a discrete map.
struct DiscreteFiberSpace {
    FiberKind kind = FiberKind::torus;
    TruncatedBasis basis;  // torus fibers
    Grid grid;             // torus fibers
    int order = 0;         // cyclic fibers
    int window = 0;        // lattice fibers: [-window, window]

    static DiscreteFiberSpace for_map(const DiscreteSkewMap& map, int fiber_cutoff);
    std::size_t size() const;
    BasisDescriptor descriptor() const;
};

/// Matrix of u -> u o g(y, .) in the orthonormal basis of the fiber space.
OperatorMatrix assemble_fiber_koopman(const DiscreteSkewMap& map, double y, const DiscreteFiberSpace& fiber);

OperatorMatrix assemble_multiplication(const std::function<cplx(std::span<const double>)>& symbol,
                                       const TruncatedBasis& fiber_basis, const Grid& fiber_grid);

/// Fiber generator with the base point frozen: entries i sum_d j_d f^_d(y; j' - j).
Eigen::MatrixXcd fiber_generator(const ContinuousSkewSystem& system, double y, const TruncatedBasis& fiber_basis,
                                 const Grid& fiber_grid);

/// Largest entry modulus of V + V* restricted to modes with |m_d| <= K_d / 2.
double skew_defect_inner(const OperatorMatrix& V, const TruncatedBasis& basis);
std::vector<std::size_t> inner_band(const TruncatedBasis& basis);

}  // namespace eigenop
