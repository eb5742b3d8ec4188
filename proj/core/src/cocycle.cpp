#include "eigenop/cocycle.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "eigenop/error.hpp"
#include "parallel.hpp"

namespace eigenop {

Eigen::MatrixXcd discrete_w_matrix(const DiscreteSkewMap& map, double y, int i, const KoopmanProvider& koopman) {
    if (i == 0) {
        const Eigen::MatrixXcd probe = koopman(y);
        return Eigen::MatrixXcd::Identity(probe.rows(), probe.cols());
    }
    Eigen::MatrixXcd W;
    if (i > 0) {
        double x = y;
        for (int k = 0; k < i; ++k) {
            const Eigen::MatrixXcd U = koopman(x);
            W = k == 0 ? U : Eigen::MatrixXcd(W * U);
            x = map.base_map(x);
        }
    } else {
        double x = y;
        for (int k = 0; k < -i; ++k) {
            x = map.base_inverse(x);
            const Eigen::MatrixXcd U = koopman(x).adjoint();
            W = k == 0 ? U : Eigen::MatrixXcd(W * U);
        }
    }
    return W;
}

CocycleMatrix discrete_w(const DiscreteSkewMap& map, double y, int i, const KoopmanProvider& koopman, BasisDescriptor basis) {
    CocycleMatrix out;
    out.y = y;
    out.i = i;
    out.matrix.rows = basis;
    out.matrix.cols = basis;
    out.matrix.entries = discrete_w_matrix(map, y, i, koopman);
    out.matrix.provenance = Provenance::composed;
    const auto n = out.matrix.entries.cols();
    out.unitarity_defect = (out.matrix.entries.adjoint() * out.matrix.entries - Eigen::MatrixXcd::Identity(n, n)).norm();
    return out;
}

FieldSample continuous_w_apply(const ContinuousSkewSystem& system, double y, double s, const Eigen::VectorXcd& u,
                               const TruncatedBasis& fiber_basis, const Grid& grid, const FlowSettings& settings) {
    if (grid.dimensionality() != system.fiber_dimension || fiber_basis.dimensionality() != system.fiber_dimension)
        throw ConfigurationError("fiber grid dimension does not match the system");
    if (static_cast<std::size_t>(u.size()) != fiber_basis.size()) throw ConfigurationError("coefficient vector does not match the fiber basis");
    FieldSample out{grid, Eigen::VectorXcd(static_cast<Eigen::Index>(grid.size()))};
    const int steps = steps_for(s, settings.steps_per_unit_time);
    const bool closed = settings.use_closed_form && static_cast<bool>(system.closed_form_fiber_flow);
    detail::parallel_for(grid.size(), settings.threads, [&](std::size_t n) {
        const auto c = grid.coordinates(n);
        FiberPoint z = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
        if (s != 0.0) z = closed ? system.closed_form_fiber_flow(s, y, z) : flow_fiber(system, y, z, s, steps);
        out.values[static_cast<Eigen::Index>(n)] = evaluate(u, fiber_basis, {z.data(), static_cast<std::size_t>(z.size())});
    });
    return out;
}

FieldSample hatw_field(const ContinuousSkewSystem& system, const FiberSubspace& at_hs_y, double y, double s,
                       const Eigen::VectorXcd& u, const TruncatedBasis& fiber_basis, const Grid& grid,
                       const FlowSettings& settings) {
    if (at_hs_y.projection.rows() != u.size()) throw ConfigurationError("subspace does not match the fiber basis");
    const Eigen::VectorXcd projected = at_hs_y.projection * u;
    return continuous_w_apply(system, y, s, projected, fiber_basis, grid, settings);
}

TestVector test_vector(const Eigen::MatrixXcd& eigvecs, const TruncatedBasis& basis, double y, std::size_t d) {
    if (d == 0 || d > static_cast<std::size_t>(eigvecs.cols())) throw ConfigurationError("test vector needs 1 <= d <= available eigenvectors");
    TestVector out;
    out.y = y;
    out.d = d;
    out.coeffs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.fiber_size()));
    for (std::size_t i = 0; i < d; ++i) out.coeffs += restrict_vector(eigvecs.col(static_cast<Eigen::Index>(i)), basis, y);
    out.coeffs /= static_cast<double>(d);
    return out;
}

double field_norm(const FieldSample& field) {
    return std::sqrt(field.values.squaredNorm() * field.grid.weight());
}

CorrespondenceReport koopman_correspondence_check(const DiscreteSkewMap& map, const DiscreteFiberSpace& fiber,
                                                  const CorrespondenceSettings& settings) {
    if (fiber.kind != FiberKind::torus || fiber.basis.dimensionality() != 1)
        throw ConfigurationError("correspondence check needs a one-dimensional torus fiber");
    const int Kf = fiber.basis.cutoffs()[0];
    if (settings.test_fiber_cutoff > Kf || settings.test_base_cutoff > settings.base_cutoff)
        throw ConfigurationError("test functions exceed the truncation");
    const auto product = TruncatedBasis::skew(settings.base_cutoff, {Kf});
    const Grid grid = Grid::for_basis(product);
    const auto koopman = koopman_provider(map, fiber);

    // Galerkin columns of U_T for every product mode a test function may use
    const int kb = settings.test_base_cutoff, kf = settings.test_fiber_cutoff;
    std::vector<Eigen::VectorXcd> columns;
    FieldSample sample{grid, Eigen::VectorXcd(static_cast<Eigen::Index>(grid.size()))};
    for (int k = -kb; k <= kb; ++k)
        for (int j = -kf; j <= kf; ++j) {
            for (std::size_t n = 0; n < grid.size(); ++n) {
                const auto c = grid.coordinates(n);
                sample.values[static_cast<Eigen::Index>(n)] = std::polar(1.0, k * map.base_map(c[0]) + j * map.fiber_map(c[0], c[1]));
            }
            columns.push_back(analyze(sample, product));
        }

    std::mt19937_64 rng(settings.seed);
    std::normal_distribution<double> N;
    CorrespondenceReport report;
    report.base_samples = settings.base_samples;
    for (std::size_t t = 0; t < settings.tests; ++t) {
        Eigen::VectorXcd v(2 * kb + 1), u = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(fiber.size()));
        for (auto& x : v) x = {N(rng), N(rng)};
        for (int j = -kf; j <= kf; ++j) {
            const int mode[] = {j};
            u(static_cast<Eigen::Index>(*fiber.basis.index_of(mode))) = {N(rng), N(rng)};
        }
        const double scale = v.norm() * u.norm();
        Eigen::VectorXcd image = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(product.size()));
        std::size_t col = 0;
        for (int k = -kb; k <= kb; ++k)
            for (int j = -kf; j <= kf; ++j, ++col) {
                const int mode[] = {j};
                image += v(k + kb) * u(static_cast<Eigen::Index>(*fiber.basis.index_of(mode))) * columns[col];
            }
        double worst = 0.0;
        for (std::size_t m = 0; m < settings.base_samples; ++m) {
            const double y = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(settings.base_samples);
            const Eigen::VectorXcd direct = restrict_vector(image, product, y);
            const double hy = map.base_map(y);
            cplx vh = 0.0;
            for (int k = -kb; k <= kb; ++k) vh += v(k + kb) * std::polar(1.0, k * hy);
            const Eigen::VectorXcd module = vh * (koopman(y) * u);
            worst = std::max(worst, (direct - module).norm() / scale);
        }
        report.discrepancies.push_back(worst);
        report.max_discrepancy = std::max(report.max_discrepancy, worst);
    }
    return report;
}

DiscreteSkewMap time_s_map(const ContinuousSkewSystem& system, double s, int steps_per_unit_time) {
    if (system.fiber_dimension != 1) throw ConfigurationError("time-s map needs a one-dimensional fiber");
    const int steps = steps_for(s, steps_per_unit_time);
    DiscreteSkewMap map;
    map.name = system.name + "_time_map";
    map.fiber_kind = FiberKind::torus;
    map.base_map = [system, s, steps](double y) { return base_flow_map(system, y, s, steps); };
    map.base_inverse = [system, s, steps](double y) { return base_flow_map(system, y, -s, steps); };
    map.fiber_map = [system, s, steps](double y, double z) {
        FiberPoint p(1);
        p(0) = z;
        return flow_fiber(system, y, p, s, steps)(0);
    };
    map.parameters = system.parameters;
    return map;
}

}  // namespace eigenop
