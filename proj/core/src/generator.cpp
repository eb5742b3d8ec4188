#include "eigenop/generator.hpp"

#include <cmath>
#include <numbers>

#include "eigenop/error.hpp"
#include "parallel.hpp"

namespace eigenop {

namespace {

constexpr cplx I{0.0, 1.0};

// Offsets of each mode inside a coefficient box of radius 2K so that the flat box
// index of m' - m is offset(m') - offset(m) + center.
struct DifferenceIndexer {
    std::vector<long> offset;
    long center = 0;

    explicit DifferenceIndexer(const TruncatedBasis& basis) {
        const auto& K = basis.cutoffs();
        std::vector<long> stride(K.size(), 1);
        for (std::size_t d = K.size(); d-- > 1;) stride[d - 1] = stride[d] * (4 * K[d] + 1);
        for (std::size_t d = 0; d < K.size(); ++d) center += 2L * K[d] * stride[d];
        offset.resize(basis.size());
        for (std::size_t i = 0; i < basis.size(); ++i) {
            long o = 0;
            for (std::size_t d = 0; d < K.size(); ++d) o += (basis.component(i, d) + K[d]) * stride[d];
            offset[i] = o;
        }
    }

    std::size_t operator()(std::size_t row, std::size_t col) const {
        return static_cast<std::size_t>(offset[row] - offset[col] + center);
    }
};

std::vector<int> doubled(const std::vector<int>& k) {
    std::vector<int> r;
    for (int v : k) r.push_back(2 * v);
    return r;
}

// Relative energy of the outermost resolvable frequencies; large values mean the
// sampled field is not resolved by the grid.
double tail_indicator(const Grid& grid, std::span<const cplx> samples) {
    std::vector<int> radii;
    for (int p : grid.points()) radii.push_back((p - 1) / 2);
    const auto box = fourier_box(grid, samples, radii);
    double total = 0.0, tail = 0.0;
    std::vector<int> n(radii.size());
    for (std::size_t i = 0; i < box.values.size(); ++i) {
        std::size_t rem = i;
        bool outer = false;
        for (std::size_t d = radii.size(); d-- > 0;) {
            const auto w = static_cast<std::size_t>(2 * radii[d] + 1);
            n[d] = static_cast<int>(rem % w) - radii[d];
            rem /= w;
            if (radii[d] > 0 && 4 * std::abs(n[d]) > 3 * radii[d]) outer = true;
        }
        const double e = std::norm(box.values[i]);
        total += e;
        if (outer) tail += e;
    }
    return total > 0 ? std::sqrt(tail / total) : 0.0;
}

}  // namespace

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::generator: return "generator";
        case Provenance::smoothed_generator: return "smoothed_generator";
        case Provenance::fiber_koopman: return "fiber_koopman";
        case Provenance::multiplication: return "multiplication";
        case Provenance::projection: return "projection";
        case Provenance::composed: return "composed";
    }
    return "composed";
}

BasisDescriptor BasisDescriptor::fourier(const TruncatedBasis& basis) {
    return {"fourier", basis.cutoffs(), basis.roles(), basis.size()};
}

BasisDescriptor BasisDescriptor::points(int order) {
    return {"points", {order}, {FactorRole::fiber}, static_cast<std::size_t>(order)};
}

BasisDescriptor BasisDescriptor::lattice(int window) {
    return {"lattice", {window}, {FactorRole::fiber}, static_cast<std::size_t>(2 * window + 1)};
}

GeneratorAssembly assemble_generator(const ContinuousSkewSystem& system, const TruncatedBasis& basis,
                                     const Grid& grid, int threads) {
    if (!basis.is_skew()) throw ConfigurationError("assemble_generator: basis needs one base factor followed by fiber factors");
    if (basis.dimensionality() != system.fiber_dimension + 1)
        throw ConfigurationError("assemble_generator: basis fiber dimension does not match the system");
    if (!grid.resolves(basis)) throw ConfigurationError("assemble_generator: grid does not resolve the basis (aliasing)");

    const std::size_t D = basis.dimensionality();
    const std::size_t nodes = grid.size();
    std::vector<std::vector<cplx>> velocity(D, std::vector<cplx>(nodes));
    detail::parallel_for(nodes, threads, [&](std::size_t n) {
        std::vector<double> x(D);
        grid.coordinates(n, x);
        FiberPoint z(static_cast<Eigen::Index>(D - 1));
        for (std::size_t d = 1; d < D; ++d) z[static_cast<Eigen::Index>(d - 1)] = x[d];
        velocity[0][n] = system.base_velocity(x[0]);
        const FiberPoint f = system.fiber_velocity(x[0], z);
        for (std::size_t d = 1; d < D; ++d) velocity[d][n] = f[static_cast<Eigen::Index>(d - 1)];
    });

    GeneratorAssembly out;
    std::vector<CoefficientBox> boxes;
    const auto radii = doubled(basis.cutoffs());
    for (std::size_t d = 0; d < D; ++d) {
        boxes.push_back(fourier_box(grid, velocity[d], radii));
        out.report.aliasing_indicator = std::max(out.report.aliasing_indicator, tail_indicator(grid, velocity[d]));
    }
    if (out.report.aliasing_indicator > 1e-5) {
        out.report.aliasing_warning = true;
        out.report.warnings.push_back("velocity field has significant energy near the grid Nyquist band; "
                                      "increase grid points to reduce aliasing");
    }

    const std::size_t N = basis.size();
    const DifferenceIndexer index(basis);
    Eigen::MatrixXcd V(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    detail::parallel_for(N, threads, [&](std::size_t col) {
        std::vector<double> j(D);
        for (std::size_t d = 0; d < D; ++d) j[d] = basis.component(col, d);
        for (std::size_t row = 0; row < N; ++row) {
            const std::size_t k = index(row, col);
            cplx v = 0.0;
            for (std::size_t d = 0; d < D; ++d)
                if (j[d] != 0.0) v += j[d] * boxes[d].values[k];
            V(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = I * v;
        }
    });
    out.matrix = {BasisDescriptor::fourier(basis), BasisDescriptor::fourier(basis), std::move(V), Provenance::generator};
    return out;
}

std::string to_string(WeightRule rule) { return rule == WeightRule::power ? "power" : "kernel"; }

WeightRule weight_rule_from_string(const std::string& name) {
    if (name == "power") return WeightRule::power;
    if (name == "kernel") return WeightRule::kernel;
    throw ConfigurationError("smoothing: unknown weight rule '" + name + "' (expected power or kernel)");
}

SmoothingWeights smoothing_weights(const TruncatedBasis& basis, double tau, double p, WeightRule rule) {
    if (!(tau > 0.0)) throw ConfigurationError("smoothing: tau must be positive");
    if (!(p > 0.0)) throw ConfigurationError("smoothing: p must be positive");
    SmoothingWeights w{tau, p, rule, Eigen::VectorXd(static_cast<Eigen::Index>(basis.size()))};
    for (std::size_t i = 0; i < basis.size(); ++i) {
        double value = 1.0;
        if (rule == WeightRule::power) {
            double e = 0.0;
            for (std::size_t d = 0; d < basis.dimensionality(); ++d) {
                const int m = std::abs(basis.component(i, d));
                if (m != 0) e += std::pow(static_cast<double>(m), p);
            }
            value = std::exp(-tau * e);
        } else {
            double s = 0.0;
            for (std::size_t d = 0; d < basis.dimensionality(); ++d) s += std::abs(basis.component(i, d));
            value = std::exp(-tau * std::expm1(s));
        }
        w.weights[static_cast<Eigen::Index>(i)] = value;
    }
    return w;
}

OperatorMatrix smoothed_generator(const OperatorMatrix& V, const SmoothingWeights& w, bool symmetric) {
    if (V.entries.rows() != V.entries.cols() || V.entries.rows() != w.weights.size())
        throw ConfigurationError("smoothed_generator: dimension mismatch between matrix and weights");
    OperatorMatrix out{V.rows, V.cols, {}, Provenance::smoothed_generator};
    if (symmetric) {
        const Eigen::VectorXd s = w.weights.cwiseSqrt();
        out.entries = s.asDiagonal() * V.entries * s.asDiagonal();
    } else {
        out.entries = w.weights.asDiagonal() * V.entries;
    }
    return out;
}

OperatorMatrix assemble_fiber_koopman(const ContinuousSkewSystem& system, double y, double s,
                                      const TruncatedBasis& fiber_basis, const Grid& fiber_grid, int steps,
                                      bool use_closed_form) {
    if (fiber_basis.dimensionality() != system.fiber_dimension)
        throw ConfigurationError("assemble_fiber_koopman: fiber basis dimension does not match the system");
    if (!fiber_grid.resolves(fiber_basis)) throw ConfigurationError("assemble_fiber_koopman: grid does not resolve the basis");
    const std::size_t D = fiber_basis.dimensionality();
    std::vector<std::vector<double>> images(fiber_grid.size());
    for (std::size_t n = 0; n < fiber_grid.size(); ++n) {
        const auto x = fiber_grid.coordinates(n);
        FiberPoint z = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(D));
        const FiberPoint zs = use_closed_form ? fiber_flow_map(system, y, z, s, steps) : flow_fiber(system, y, z, s, steps);
        images[n].assign(zs.data(), zs.data() + zs.size());
    }
    const std::size_t N = fiber_basis.size();
    Eigen::MatrixXcd U(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    FieldSample column{fiber_grid, Eigen::VectorXcd(static_cast<Eigen::Index>(fiber_grid.size()))};
    for (std::size_t m = 0; m < N; ++m) {
        for (std::size_t n = 0; n < fiber_grid.size(); ++n) {
            double phase = 0.0;
            for (std::size_t d = 0; d < D; ++d) phase += fiber_basis.component(m, d) * images[n][d];
            column.values[static_cast<Eigen::Index>(n)] = std::polar(1.0, phase);
        }
        U.col(static_cast<Eigen::Index>(m)) = analyze(column, fiber_basis);
    }
    const auto desc = BasisDescriptor::fourier(fiber_basis);
    return {desc, desc, std::move(U), Provenance::fiber_koopman};
}

DiscreteFiberSpace DiscreteFiberSpace::for_map(const DiscreteSkewMap& map, int fiber_cutoff) {
    DiscreteFiberSpace f;
    f.kind = map.fiber_kind;
    if (map.fiber_kind == FiberKind::torus) {
        f.basis = TruncatedBasis({fiber_cutoff});
        f.grid = Grid::for_basis(f.basis);
    } else if (map.fiber_kind == FiberKind::cyclic) {
        f.order = map.fiber_order;
    } else {
        f.window = map.fiber_order;
    }
    return f;
}

std::size_t DiscreteFiberSpace::size() const {
    switch (kind) {
        case FiberKind::torus: return basis.size();
        case FiberKind::cyclic: return static_cast<std::size_t>(order);
        case FiberKind::lattice: return static_cast<std::size_t>(2 * window + 1);
    }
    return 0;
}

BasisDescriptor DiscreteFiberSpace::descriptor() const {
    switch (kind) {
        case FiberKind::torus: return BasisDescriptor::fourier(basis);
        case FiberKind::cyclic: return BasisDescriptor::points(order);
        case FiberKind::lattice: return BasisDescriptor::lattice(window);
    }
    return {};
}

OperatorMatrix assemble_fiber_koopman(const DiscreteSkewMap& map, double y, const DiscreteFiberSpace& fiber) {
    if (fiber.kind != map.fiber_kind) throw ConfigurationError("assemble_fiber_koopman: fiber space does not match the map");
    const auto N = static_cast<Eigen::Index>(fiber.size());
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(N, N);
    if (fiber.kind == FiberKind::torus) {
        if (!fiber.grid.resolves(fiber.basis)) throw ConfigurationError("assemble_fiber_koopman: grid does not resolve the basis");
        FieldSample column{fiber.grid, Eigen::VectorXcd(static_cast<Eigen::Index>(fiber.grid.size()))};
        std::vector<double> images(fiber.grid.size());
        for (std::size_t n = 0; n < fiber.grid.size(); ++n) images[n] = map.fiber_map(y, fiber.grid.node(0, static_cast<int>(n)));
        for (Eigen::Index m = 0; m < N; ++m) {
            const int j = fiber.basis.component(static_cast<std::size_t>(m), 0);
            for (std::size_t n = 0; n < images.size(); ++n) column.values[static_cast<Eigen::Index>(n)] = std::polar(1.0, j * images[n]);
            U.col(m) = analyze(column, fiber.basis);
        }
    } else {
        // Point basis: (U e_a)(z) = e_a(g(y, z)), so entry (z, a) is 1 when g(y, z) = a.
        const long lo = fiber.kind == FiberKind::cyclic ? 0 : -fiber.window;
        for (Eigen::Index r = 0; r < N; ++r) {
            const long z = lo + r;
            const long a = std::lround(map.fiber_map(y, static_cast<double>(z)));
            const long c = a - lo;
            if (c >= 0 && c < N) U(r, static_cast<Eigen::Index>(c)) = 1.0;
        }
    }
    const auto desc = fiber.descriptor();
    return {desc, desc, std::move(U), Provenance::fiber_koopman};
}

OperatorMatrix assemble_multiplication(const std::function<cplx(std::span<const double>)>& symbol,
                                       const TruncatedBasis& fiber_basis, const Grid& fiber_grid) {
    if (!fiber_grid.resolves(fiber_basis)) throw ConfigurationError("assemble_multiplication: grid does not resolve the basis");
    const FieldSample s = sample_field(symbol, fiber_grid);
    const auto box = fourier_box(fiber_grid, {s.values.data(), fiber_grid.size()}, doubled(fiber_basis.cutoffs()));
    const std::size_t N = fiber_basis.size();
    const DifferenceIndexer index(fiber_basis);
    Eigen::MatrixXcd M(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    for (std::size_t c = 0; c < N; ++c)
        for (std::size_t r = 0; r < N; ++r) M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = box.values[index(r, c)];
    const auto desc = BasisDescriptor::fourier(fiber_basis);
    return {desc, desc, std::move(M), Provenance::multiplication};
}

Eigen::MatrixXcd fiber_generator(const ContinuousSkewSystem& system, double y, const TruncatedBasis& fiber_basis,
                                 const Grid& fiber_grid) {
    if (!fiber_grid.resolves(fiber_basis)) throw ConfigurationError("fiber_generator: grid does not resolve the basis");
    const std::size_t D = fiber_basis.dimensionality();
    std::vector<std::vector<cplx>> f(D, std::vector<cplx>(fiber_grid.size()));
    for (std::size_t n = 0; n < fiber_grid.size(); ++n) {
        const auto x = fiber_grid.coordinates(n);
        const FiberPoint z = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(D));
        const FiberPoint v = system.fiber_velocity(y, z);
        for (std::size_t d = 0; d < D; ++d) f[d][n] = v[static_cast<Eigen::Index>(d)];
    }
    std::vector<CoefficientBox> boxes;
    for (std::size_t d = 0; d < D; ++d) boxes.push_back(fourier_box(fiber_grid, f[d], doubled(fiber_basis.cutoffs())));
    const std::size_t N = fiber_basis.size();
    const DifferenceIndexer index(fiber_basis);
    Eigen::MatrixXcd F(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    for (std::size_t c = 0; c < N; ++c)
        for (std::size_t r = 0; r < N; ++r) {
            cplx v = 0.0;
            for (std::size_t d = 0; d < D; ++d) {
                const int j = fiber_basis.component(c, d);
                if (j != 0) v += static_cast<double>(j) * boxes[d].values[index(r, c)];
            }
            F(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = I * v;
        }
    return F;
}

std::vector<std::size_t> inner_band(const TruncatedBasis& basis) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        bool inner = true;
        for (std::size_t d = 0; d < basis.dimensionality(); ++d)
            if (2 * std::abs(basis.component(i, d)) > basis.cutoffs()[d]) inner = false;
        if (inner) idx.push_back(i);
    }
    return idx;
}

double skew_defect_inner(const OperatorMatrix& V, const TruncatedBasis& basis) {
    const auto idx = inner_band(basis);
    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXcd H(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = 0; r < n; ++r) {
            const auto R = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]);
            const auto C = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)]);
            H(r, c) = V.entries(R, C) + std::conj(V.entries(C, R));
        }
    if (n == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace eigenop
