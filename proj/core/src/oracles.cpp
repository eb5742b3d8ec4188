#include "eigenop/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "eigenop/error.hpp"

namespace eigenop {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace

RotationOracle rotation_oracle(double alpha, double beta, int k, int j, double y, double s) {
    RotationOracle out;
    out.eigenvalue = cplx(0.0, k + j * alpha * (1.0 + beta * std::cos(y)));
    out.phase = std::polar(1.0, j * alpha * (s + beta * (std::sin(y + s) - std::sin(y))));
    return out;
}

cplx rotation_generator_eigenvalue(double alpha, int k, int j) { return cplx(0.0, k + j * alpha); }

GroupTable cyclic_group_table(int m) {
    if (m < 1) throw ConfigurationError("cyclic group order must be positive");
    GroupTable g;
    g.name = "Z" + std::to_string(m);
    g.product.assign(static_cast<std::size_t>(m), std::vector<int>(static_cast<std::size_t>(m)));
    for (int a = 0; a < m; ++a) {
        g.elements.push_back(std::to_string(a));
        g.inverse.push_back((m - a) % m);
        for (int b = 0; b < m; ++b) g.product[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = (a + b) % m;
    }
    for (int l = 0; l < m; ++l) {
        Irrep chi;
        chi.name = "chi" + std::to_string(l);
        for (int a = 0; a < m; ++a) chi.matrices.push_back(Eigen::MatrixXcd::Constant(1, 1, std::polar(1.0, two_pi * l * a / m)));
        g.irreps.push_back(std::move(chi));
    }
    return g;
}

GroupTable symmetric_group_s3() {
    using Perm = std::array<int, 3>;
    const std::vector<Perm> perms = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}};
    const std::vector<std::string> names = {"e", "(012)", "(021)", "(01)", "(12)", "(02)"};
    auto find = [&](const Perm& p) {
        return static_cast<int>(std::find(perms.begin(), perms.end(), p) - perms.begin());
    };
    GroupTable g;
    g.name = "S3";
    g.elements = names;
    g.product.assign(6, std::vector<int>(6));
    for (std::size_t a = 0; a < 6; ++a) {
        Perm inv{};
        for (int x = 0; x < 3; ++x) inv[static_cast<std::size_t>(perms[a][static_cast<std::size_t>(x)])] = x;
        g.inverse.push_back(find(inv));
        for (std::size_t b = 0; b < 6; ++b) {
            Perm ab{};
            for (std::size_t x = 0; x < 3; ++x) ab[x] = perms[a][static_cast<std::size_t>(perms[b][x])];
            g.product[a][b] = find(ab);
        }
    }
    // orthonormal basis of the plane x + y + z = 0
    Eigen::Matrix<double, 3, 2> B;
    B << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(6.0), -1.0 / std::sqrt(2.0), 1.0 / std::sqrt(6.0), 0.0, -2.0 / std::sqrt(6.0);
    Irrep trivial{"trivial", 1, {}}, sign{"sign", 1, {}}, standard{"standard", 2, {}};
    for (std::size_t a = 0; a < 6; ++a) {
        Eigen::Matrix3d P = Eigen::Matrix3d::Zero();
        for (std::size_t x = 0; x < 3; ++x) P(perms[a][x], static_cast<Eigen::Index>(x)) = 1.0;
        trivial.matrices.push_back(Eigen::MatrixXcd::Ones(1, 1));
        sign.matrices.push_back(Eigen::MatrixXcd::Constant(1, 1, P.determinant()));
        standard.matrices.push_back((B.transpose() * P * B).cast<cplx>());
    }
    g.irreps = {trivial, sign, standard};
    return g;
}

bool satisfies_group_axioms(const GroupTable& group) {
    const auto n = group.order();
    for (std::size_t a = 0; a < n; ++a) {
        if (group.product[static_cast<std::size_t>(group.identity)][a] != static_cast<int>(a)) return false;
        if (group.product[a][static_cast<std::size_t>(group.identity)] != static_cast<int>(a)) return false;
        if (group.product[a][static_cast<std::size_t>(group.inverse[a])] != group.identity) return false;
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t c = 0; c < n; ++c) {
                const int ab_c = group.product[static_cast<std::size_t>(group.product[a][b])][c];
                const int a_bc = group.product[a][static_cast<std::size_t>(group.product[b][c])];
                if (ab_c != a_bc) return false;
            }
    }
    return true;
}

bool irreps_complete(const GroupTable& group) {
    std::size_t total = 0;
    for (const auto& r : group.irreps) total += static_cast<std::size_t>(r.dimension * r.dimension);
    return total == group.order();
}

double irrep_defect(const GroupTable& group) {
    double worst = 0.0;
    const auto n = group.order();
    for (const auto& r : group.irreps) {
        const auto I = Eigen::MatrixXcd::Identity(r.dimension, r.dimension);
        for (std::size_t a = 0; a < n; ++a) {
            worst = std::max(worst, (r.matrices[a].adjoint() * r.matrices[a] - I).cwiseAbs().maxCoeff());
            for (std::size_t b = 0; b < n; ++b) {
                const auto& ab = r.matrices[static_cast<std::size_t>(group.product[a][b])];
                worst = std::max(worst, (r.matrices[a] * r.matrices[b] - ab).cwiseAbs().maxCoeff());
            }
        }
    }
    return worst;
}

PeterWeylDecomposition peter_weyl_blockdiag(const GroupTable& group, int element) {
    if (!irreps_complete(group)) throw ConfigurationError("irrep list is incomplete");
    const auto n = static_cast<Eigen::Index>(group.order());
    if (element < 0 || element >= n) throw ConfigurationError("group element out of range");
    PeterWeylDecomposition out;
    out.koopman = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index z = 0; z < n; ++z)
        out.koopman(z, group.product[static_cast<std::size_t>(z)][static_cast<std::size_t>(element)]) = 1.0;

    out.change_of_basis = Eigen::MatrixXcd(n, n);
    out.block_diagonal = Eigen::MatrixXcd::Zero(n, n);
    Eigen::Index col = 0;
    for (std::size_t r = 0; r < group.irreps.size(); ++r) {
        const auto& rho = group.irreps[r];
        const double scale = std::sqrt(static_cast<double>(rho.dimension) / static_cast<double>(n));
        for (int i = 0; i < rho.dimension; ++i) {
            // gamma_{rho,i,j}(z) = rho(z)_{ij}, j = 0..dim-1
            for (int j = 0; j < rho.dimension; ++j)
                for (Eigen::Index z = 0; z < n; ++z)
                    out.change_of_basis(z, col + j) = scale * rho.matrices[static_cast<std::size_t>(z)](i, j);
            const Eigen::MatrixXcd& blk = rho.matrices[static_cast<std::size_t>(element)];
            out.block_diagonal.block(col, col, rho.dimension, rho.dimension) = blk;
            out.blocks.push_back({r, i, blk});
            col += rho.dimension;
        }
    }
    const Eigen::MatrixXcd& W = out.change_of_basis;
    out.unitarity_defect = (W.adjoint() * W - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    out.residual = (W.adjoint() * out.koopman * W - out.block_diagonal).cwiseAbs().maxCoeff();
    return out;
}

bool ArcSet::is_full_circle(double tol) const {
    double total = 0.0;
    for (const auto& a : arcs) total += a.end - a.begin;
    return total >= two_pi - tol;
}

bool ArcSet::contains(cplx z, double tol) const {
    if (std::abs(std::abs(z) - 1.0) > tol) return false;
    const double p = normalize_phase_angle(std::arg(z));
    auto near = [&](double a, double b) {
        const double d = std::abs(a - b);
        return std::min(d, two_pi - d) <= tol;
    };
    for (double q : points)
        if (near(p, q)) return true;
    for (const auto& a : arcs)
        if ((p >= a.begin && p <= a.end) || near(p, a.begin) || near(p, a.end)) return true;
    return false;
}

ArcSet z_fiber_symbol(int shift, const SpectralBin& bin) {
    ArcSet out;
    if (shift == 0) {
        out.points.push_back(0.0);
        return out;
    }
    std::vector<SpectralArc> pieces;
    for (const auto& a : bin.arcs) {
        const double len = std::abs(shift) * (a.end - a.begin);
        if (len >= two_pi) {
            out.arcs = {{0.0, two_pi}};
            return out;
        }
        const double start = normalize_phase_angle(shift > 0 ? shift * a.begin : shift * a.end);
        if (start + len <= two_pi) {
            pieces.push_back({start, start + len});
        } else {
            pieces.push_back({start, two_pi});
            pieces.push_back({0.0, start + len - two_pi});
        }
    }
    std::sort(pieces.begin(), pieces.end(), [](const SpectralArc& x, const SpectralArc& y) { return x.begin < y.begin; });
    for (const auto& p : pieces) {
        if (!out.arcs.empty() && p.begin <= out.arcs.back().end) {
            out.arcs.back().end = std::max(out.arcs.back().end, p.end);
        } else {
            out.arcs.push_back(p);
        }
    }
    return out;
}

}  // namespace eigenop
