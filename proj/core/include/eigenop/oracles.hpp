#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eigenop/basis.hpp"
#include "eigenop/oseledets.hpp"

namespace eigenop {

struct RotationOracle {
    cplx eigenvalue;  // i(k + j alpha (1 + beta cos y))
    cplx phase;       // e^{i j alpha (s + beta (sin(y + s) - sin y))}
};

RotationOracle rotation_oracle(double alpha, double beta, int k, int j, double y, double s);

/// Eigenvalue i(k + j alpha) of the full rotation generator (the base average of the fiber speed).
cplx rotation_generator_eigenvalue(double alpha, int k, int j);

struct Irrep {
    std::string name;
    int dimension = 1;
    std::vector<Eigen::MatrixXcd> matrices;  // one per group element
};

struct GroupTable {
    std::string name;
    std::vector<std::string> elements;
    std::vector<std::vector<int>> product;  // product[a][b] = a * b
    std::vector<int> inverse;
    int identity = 0;
    std::vector<Irrep> irreps;

    std::size_t order() const { return elements.size(); }
};

GroupTable cyclic_group_table(int m);
GroupTable symmetric_group_s3();

/// Associativity, identity and inverses checked exhaustively.
bool satisfies_group_axioms(const GroupTable& group);
/// Sum of squared irrep dimensions equals the group order.
bool irreps_complete(const GroupTable& group);
/// Largest ||rho(a)rho(b) - rho(ab)|| and ||rho(a)^* rho(a) - I|| over all irreps and elements.
double irrep_defect(const GroupTable& group);

struct PeterWeylBlock {
    std::size_t irrep = 0;
    int copy = 0;
    Eigen::MatrixXcd matrix;
};

struct PeterWeylDecomposition {
    Eigen::MatrixXcd koopman;           // (U f)(z) = f(z * element)
    Eigen::MatrixXcd change_of_basis;   // orthonormal matrix-coefficient vectors as columns
    Eigen::MatrixXcd block_diagonal;
    std::vector<PeterWeylBlock> blocks;
    double residual = 0.0;              // max |W^* U W - blockdiag|
    double unitarity_defect = 0.0;      // max |W^* W - I|
};

PeterWeylDecomposition peter_weyl_blockdiag(const GroupTable& group, int element);

struct ArcSet {
    std::vector<SpectralArc> arcs;
    std::vector<double> points;

    bool is_full_circle(double tol = 1e-12) const;
    bool contains(cplx z, double tol = 1e-12) const;
};

/// Image {e^{i shift omega} : omega in bin} for an integer shift.
ArcSet z_fiber_symbol(int shift, const SpectralBin& bin);

}  // namespace eigenop
