#include "eigenop/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "eigenop/error.hpp"
#include "parallel.hpp"

namespace eigenop {

namespace {

struct BlockSolution {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;
};

BlockSolution zgeev(Eigen::MatrixXcd a, bool vectors) {
    const auto n = static_cast<lapack_int>(a.rows());
    BlockSolution out;
    out.values.resize(n);
    if (n == 0) return out;
    if (vectors) out.vectors.resize(n, n);
    cplx dummy;
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', vectors ? 'V' : 'N', n, a.data(), n, out.values.data(),
                                          &dummy, 1, vectors ? out.vectors.data() : &dummy, vectors ? n : 1);
    if (info != 0)
        throw NumericalError("eig: LAPACK zgeev failed (info=" + std::to_string(info) + ")", {static_cast<double>(info)});
    return out;
}

bool tie_less(cplx a, cplx b) {
    return std::make_tuple(a.imag(), a.real()) < std::make_tuple(b.imag(), b.real());
}

}  // namespace

std::string to_string(SortRule rule) {
    return rule == SortRule::nearest_target ? "nearest_target" : "solver_order";
}

double SpectrumReport::max_residual() const {
    double m = 0.0;
    for (double r : residuals) m = std::max(m, r);
    return m;
}

void normalize_phase(Eigen::Ref<Eigen::VectorXcd> v) {
    const double nrm = v.norm();
    if (nrm == 0.0) return;
    v /= nrm;
    Eigen::Index best = 0;
    double mag = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        // Small tolerance so that rounding noise does not decide between equal entries.
        const double a = std::abs(v[i]);
        if (a > mag * (1.0 + 1e-12)) {
            mag = a;
            best = i;
        }
    }
    const cplx phase = std::conj(v[best]) / std::abs(v[best]);
    v *= phase;
    v[best] = std::abs(v[best]);
}

std::vector<std::vector<std::size_t>> connected_blocks(const Eigen::MatrixXcd& A, double structural_zero) {
    const auto n = static_cast<std::size_t>(A.rows());
    const double cut = structural_zero * A.cwiseAbs().maxCoeff();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t r = 0; r < n; ++r)
            if (r != c && std::abs(A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))) > cut) {
                const auto a = find(r), b = find(c);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
    std::vector<std::vector<std::size_t>> blocks;
    std::vector<long> slot(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto root = find(i);
        if (slot[root] < 0) {
            slot[root] = static_cast<long>(blocks.size());
            blocks.emplace_back();
        }
        blocks[static_cast<std::size_t>(slot[root])].push_back(i);
    }
    return blocks;
}

SpectrumReport eig(const Eigen::MatrixXcd& A, double tol, const EigOptions& options, Provenance source) {
    if (A.rows() != A.cols()) throw ConfigurationError("eig: matrix must be square");
    if (!A.allFinite()) throw NumericalError("eig: matrix has non-finite entries");
    const auto n = A.rows();
    SpectrumReport rep;
    rep.tolerance = tol;
    rep.source = source;
    rep.eigenvalues.resize(n);
    if (options.compute_vectors) rep.eigenvectors = Eigen::MatrixXcd::Zero(n, n);
    rep.residuals.assign(static_cast<std::size_t>(n), 0.0);
    if (n == 0) return rep;

    std::vector<std::vector<std::size_t>> blocks;
    if (options.detect_blocks) {
        blocks = connected_blocks(A, options.structural_zero);
    } else {
        blocks.emplace_back(static_cast<std::size_t>(n));
        std::iota(blocks[0].begin(), blocks[0].end(), 0);
    }
    std::vector<Eigen::Index> start(blocks.size());
    Eigen::Index pos = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        start[b] = pos;
        pos += static_cast<Eigen::Index>(blocks[b].size());
        rep.block_sizes.push_back(blocks[b].size());
    }
    const double normA = A.norm();

    detail::parallel_for(blocks.size(), options.threads, [&](std::size_t b) {
        const auto& idx = blocks[b];
        const auto m = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXcd sub(m, m);
        for (Eigen::Index c = 0; c < m; ++c)
            for (Eigen::Index r = 0; r < m; ++r)
                sub(r, c) = A(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]),
                              static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)]));
        // Frobenius norm of the entries in these columns that lie outside the block.
        double leak2 = 0.0;
        if (blocks.size() > 1) {
            std::vector<char> inside(static_cast<std::size_t>(n), 0);
            for (auto i : idx) inside[i] = 1;
            for (auto c : idx)
                for (Eigen::Index r = 0; r < n; ++r)
                    if (!inside[static_cast<std::size_t>(r)]) leak2 += std::norm(A(r, static_cast<Eigen::Index>(c)));
        }
        BlockSolution sol = zgeev(sub, options.compute_vectors);
        for (Eigen::Index k = 0; k < m; ++k) {
            const Eigen::Index out = start[b] + k;
            rep.eigenvalues[out] = sol.values[k];
            if (!options.compute_vectors) continue;
            Eigen::VectorXcd v = sol.vectors.col(k);
            normalize_phase(v);
            const double r_in = (sub * v - sol.values[k] * v).norm();
            rep.residuals[static_cast<std::size_t>(out)] = normA > 0 ? std::sqrt(r_in * r_in + leak2) / normA : 0.0;
            for (Eigen::Index r = 0; r < m; ++r)
                rep.eigenvectors(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]), out) = v[r];
        }
    });

    if (options.compute_vectors && rep.max_residual() > tol)
        throw NumericalError("eig: residual certificate failed (max residual " + std::to_string(rep.max_residual()) +
                                 " > tolerance " + std::to_string(tol) + ")",
                             rep.residuals);
    return rep;
}

SpectrumReport eig(const OperatorMatrix& A, double tol, const EigOptions& options) {
    return eig(A.entries, tol, options, A.provenance);
}

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXcd& A) {
    if (A.rows() != A.cols()) throw ConfigurationError("eigenvalues: matrix must be square");
    return zgeev(A, false).values;
}

SpectrumReport sort_by_target(SpectrumReport report, cplx target) {
    const auto n = report.eigenvalues.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const cplx la = report.eigenvalues[a], lb = report.eigenvalues[b];
        const double da = std::abs(la - target), db = std::abs(lb - target);
        if (da != db) return da < db;
        return tie_less(la, lb);
    });
    SpectrumReport out = report;
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto src = order[static_cast<std::size_t>(k)];
        out.eigenvalues[k] = report.eigenvalues[src];
        if (report.eigenvectors.cols() == n) out.eigenvectors.col(k) = report.eigenvectors.col(src);
        if (static_cast<Eigen::Index>(report.residuals.size()) == n)
            out.residuals[static_cast<std::size_t>(k)] = report.residuals[static_cast<std::size_t>(src)];
    }
    out.rule = SortRule::nearest_target;
    out.target = target;
    return out;
}

std::vector<long> match_spectra(const std::vector<cplx>& expected, const std::vector<cplx>& computed, double tol) {
    struct Pair {
        double d;
        std::size_t i, j;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < expected.size(); ++i)
        for (std::size_t j = 0; j < computed.size(); ++j) {
            const double d = std::abs(expected[i] - computed[j]);
            if (d <= tol) pairs.push_back({d, i, j});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        return std::tie(a.d, a.i, a.j) < std::tie(b.d, b.i, b.j);
    });
    std::vector<long> match(expected.size(), -1);
    std::vector<char> used(computed.size(), 0);
    for (const auto& p : pairs) {
        if (match[p.i] >= 0 || used[p.j]) continue;
        match[p.i] = static_cast<long>(p.j);
        used[p.j] = 1;
    }
    return match;
}

bool spectra_match(const std::vector<cplx>& expected, const std::vector<cplx>& computed, double tol, bool exact_size) {
    if (exact_size && expected.size() != computed.size()) return false;
    const auto m = match_spectra(expected, computed, tol);
    return std::all_of(m.begin(), m.end(), [](long v) { return v >= 0; });
}

double hausdorff_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    auto directed = [](const std::vector<cplx>& x, const std::vector<cplx>& y) {
        double worst = 0.0;
        for (const auto& p : x) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : y) best = std::min(best, std::abs(p - q));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

std::vector<cplx> to_list(const Eigen::VectorXcd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace eigenop
