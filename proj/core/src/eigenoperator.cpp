#include "eigenop/eigenoperator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "eigenop/cocycle.hpp"
#include "eigenop/error.hpp"

namespace eigenop {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

bool precedes(const cplx& a, const cplx& b) {
    if (a.imag() != b.imag()) return a.imag() < b.imag();
    return a.real() < b.real();
}

double distance_to_set(const cplx& z, const Eigen::VectorXcd& set) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : set) best = std::min(best, std::abs(z - w));
    return best;
}

double golden_minimum(const std::function<double(double)>& f, double lo, double hi, double tol, double* at = nullptr) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    double fa = f(a), fb = f(b);
    while (hi - lo > tol) {
        if (fa < fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    if (at) *at = fa < fb ? a : b;
    return std::min(fa, fb);
}

double set_excess(const Eigen::VectorXcd& from, const Eigen::VectorXcd& to) {
    double worst = 0.0;
    for (const auto& z : from) worst = std::max(worst, distance_to_set(z, to));
    return worst;
}

// Largest distance from the points of `set` to the union over the y-continuum of
// sampler(y, s). One search moves the whole set first; points that stay far are
// refined one at a time.
double excess_over_family(const Eigen::VectorXcd& set, const SpectrumSampler& sampler, double s,
                          const std::vector<double>& ys, const std::vector<Eigen::VectorXcd>& sampled) {
    std::vector<double> dist(static_cast<std::size_t>(set.size()), std::numeric_limits<double>::infinity());
    std::size_t best_i = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ys.size(); ++i) {
        for (Eigen::Index r = 0; r < set.size(); ++r)
            dist[static_cast<std::size_t>(r)] = std::min(dist[static_cast<std::size_t>(r)], distance_to_set(set(r), sampled[i]));
        const double e = set_excess(set, sampled[i]);
        if (e < best) {
            best = e;
            best_i = i;
        }
    }
    if (ys.size() < 3) return *std::max_element(dist.begin(), dist.end());
    const double step = ys[1] - ys[0];
    const double tol = 1e-9;
    double y_star = ys[best_i];
    golden_minimum([&](double y) { return set_excess(set, sampler(y, s)); }, ys[best_i] - step, ys[best_i] + step, tol, &y_star);
    const Eigen::VectorXcd at_star = sampler(y_star, s);
    double worst = 0.0;
    for (Eigen::Index r = 0; r < set.size(); ++r) {
        auto& d = dist[static_cast<std::size_t>(r)];
        d = std::min(d, distance_to_set(set(r), at_star));
        if (d > tol) {
            std::size_t near_i = 0;
            double near = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < ys.size(); ++i) {
                const double e = distance_to_set(set(r), sampled[i]);
                if (e < near) {
                    near = e;
                    near_i = i;
                }
            }
            d = std::min(d, golden_minimum([&](double y) { return distance_to_set(set(r), sampler(y, s)); },
                                           ys[near_i] - step, ys[near_i] + step, tol));
        }
        worst = std::max(worst, d);
    }
    return worst;
}

}  // namespace

std::string to_string(EigenoperatorKind kind) {
    return kind == EigenoperatorKind::discrete_M ? "discrete_M" : "continuous_N";
}

Eigen::MatrixXcd sector_subspace(const TruncatedBasis& basis, std::span<const int> fiber_mode) {
    if (!basis.is_skew()) throw ConfigurationError("sector subspace needs a skew basis");
    const auto fb = basis.fiber_basis();
    const auto f = fb.index_of(fiber_mode);
    if (!f) throw ConfigurationError("fiber mode outside the truncation");
    const std::size_t fiber = basis.fiber_size();
    const std::size_t base = basis.size() / fiber;
    Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(base));
    for (std::size_t b = 0; b < base; ++b) Q(static_cast<Eigen::Index>(b * fiber + *f), static_cast<Eigen::Index>(b)) = 1.0;
    return Q;
}

std::vector<std::size_t> sector_eigenvectors(const Eigen::MatrixXcd& eigvecs, const TruncatedBasis& basis,
                                             std::span<const int> fiber_mode, double share) {
    const auto fb = basis.fiber_basis();
    const auto f = fb.index_of(fiber_mode);
    if (!f) throw ConfigurationError("fiber mode outside the truncation");
    const std::size_t fiber = basis.fiber_size();
    const std::size_t base = basis.size() / fiber;
    std::vector<std::size_t> out;
    for (Eigen::Index c = 0; c < eigvecs.cols(); ++c) {
        double in = 0.0;
        const double total = eigvecs.col(c).squaredNorm();
        for (std::size_t b = 0; b < base; ++b) in += std::norm(eigvecs(static_cast<Eigen::Index>(b * fiber + *f), c));
        if (total > 0.0 && in >= share * total) out.push_back(static_cast<std::size_t>(c));
    }
    return out;
}

Eigen::MatrixXcd apply_frozen_generator(const ContinuousSkewSystem& system, double y_frozen, const TruncatedBasis& basis,
                                        const Grid& fiber_grid, const Eigen::MatrixXcd& Q) {
    if (!basis.is_skew()) throw ConfigurationError("frozen generator needs a skew basis");
    if (static_cast<std::size_t>(Q.rows()) != basis.size()) throw ConfigurationError("frame does not match the basis");
    const auto fb = basis.fiber_basis();
    const Eigen::MatrixXcd F = fiber_generator(system, y_frozen, fb, fiber_grid);
    const auto fiber = static_cast<Eigen::Index>(fb.size());
    const Eigen::Index base = static_cast<Eigen::Index>(basis.size()) / fiber;
    const double b = system.base_velocity(y_frozen);
    Eigen::VectorXcd dy(base);
    for (Eigen::Index k = 0; k < base; ++k) dy(k) = cplx(0.0, b * basis.component(static_cast<std::size_t>(k * fiber), 0));
    using RowMajor = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::MatrixXcd out(Q.rows(), Q.cols());
    for (Eigen::Index c = 0; c < Q.cols(); ++c) {
        const Eigen::Map<const RowMajor> C(Q.col(c).data(), base, fiber);
        Eigen::Map<RowMajor> R(out.col(c).data(), base, fiber);
        R = dy.asDiagonal() * C + C * F.transpose();
    }
    return out;
}

EigenoperatorSample continuous_eigenoperator(const ContinuousSkewSystem& system, const Eigen::MatrixXcd& frame,
                                             const TruncatedBasis& basis, const Grid& fiber_grid, double y, double s,
                                             int j, int steps_per_unit_time) {
    if (frame.cols() == 0) throw ConfigurationError("empty subspace");
    const double target = base_flow_map(system, y, s, steps_for(s, steps_per_unit_time));
    const Eigen::MatrixXcd Q = orthonormalize(frame).frame;
    EigenoperatorSample out;
    out.y = y;
    out.kind = EigenoperatorKind::continuous_N;
    out.time = s;
    out.j = j;
    BasisDescriptor desc;
    desc.kind = "frame";
    desc.extents = {static_cast<int>(Q.cols())};
    desc.size = static_cast<std::size_t>(Q.cols());
    out.matrix.rows = desc;
    out.matrix.cols = desc;
    out.matrix.entries = Q.adjoint() * apply_frozen_generator(system, target, basis, fiber_grid, Q);
    out.matrix.provenance = Provenance::composed;
    out.eigenvalues = eigenvalues(out.matrix.entries);
    return out;
}

RankOneResult rank_one_spectrum(const ContinuousSkewSystem& system, const Eigen::VectorXcd& v, const TruncatedBasis& basis,
                                double y, const Grid& fiber_grid, std::size_t norm_samples) {
    RankOneResult out;
    const auto fb = basis.fiber_basis();
    if (!fiber_grid.resolves(fb)) throw ConfigurationError("fiber grid does not resolve the fiber basis");
    const Eigen::VectorXcd a = restrict_vector(v, basis, y);
    out.norm = a.norm();
    if (out.norm < 1e-8) throw NumericalError("degenerate eigenvector: fiber norm below 1e-8", {out.norm});
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t m = 0; m < norm_samples; ++m) {
        const double n = restrict_vector(v, basis, two_pi * static_cast<double>(m) / static_cast<double>(norm_samples)).norm();
        lo = std::min(lo, n);
        hi = std::max(hi, n);
    }
    out.norm_variation = hi > 0.0 ? (hi - lo) / hi : 0.0;
    out.norm_constant = out.norm_variation <= 0.02;
    if (!out.norm_constant) out.warnings.push_back("fiber norm of the eigenvector varies by more than 2% over the base");

    const Eigen::VectorXcd u = a / out.norm;
    const FieldSample value = synthesize(u, fb, fiber_grid);
    std::vector<FieldSample> grads;
    for (std::size_t d = 0; d < fb.dimensionality(); ++d) {
        Eigen::VectorXcd du(u.size());
        for (Eigen::Index m = 0; m < u.size(); ++m) du(m) = mode_derivative(fb.mode(static_cast<std::size_t>(m)), d) * u(m);
        grads.push_back(synthesize(du, fb, fiber_grid));
    }
    std::vector<cplx> terms(fiber_grid.size());
    for (std::size_t n = 0; n < fiber_grid.size(); ++n) {
        const auto c = fiber_grid.coordinates(n);
        const FiberPoint z = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
        const FiberPoint g = system.fiber_velocity(y, z);
        cplx t = 0.0;
        for (std::size_t d = 0; d < grads.size(); ++d) t += grads[d].values[static_cast<Eigen::Index>(n)] * g(static_cast<Eigen::Index>(d));
        terms[n] = t * std::conj(value.values[static_cast<Eigen::Index>(n)]);
    }
    out.value = pairwise_sum(terms) * fiber_grid.weight();
    return out;
}

AggregatedSpectrum aggregate(const std::vector<double>& y_samples, const std::vector<Eigen::VectorXcd>& spectra, double tol) {
    if (y_samples.size() != spectra.size()) throw ConfigurationError("one spectrum per base sample is required");
    AggregatedSpectrum out;
    out.y_samples = y_samples;
    out.tolerance = tol;
    std::vector<std::size_t> last;
    for (std::size_t s = 0; s < spectra.size(); ++s) {
        for (const auto& z : spectra[s]) {
            std::size_t hit = out.values.size();
            for (std::size_t c = 0; c < out.values.size(); ++c)
                if (std::abs(out.values[c] - z) <= tol) {
                    hit = c;
                    break;
                }
            if (hit == out.values.size()) {
                out.values.push_back(z);
                out.support.push_back(1);
                last.push_back(s);
            } else if (last[hit] != s) {
                ++out.support[hit];
                last[hit] = s;
            }
        }
    }
    std::vector<std::size_t> order(out.values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return precedes(out.values[a], out.values[b]); });
    std::vector<cplx> values;
    std::vector<std::size_t> support;
    for (auto i : order) {
        values.push_back(out.values[i]);
        support.push_back(out.support[i]);
    }
    out.values = std::move(values);
    out.support = std::move(support);
    return out;
}

std::vector<double> equispaced_samples(std::size_t count) {
    std::vector<double> ys(count);
    for (std::size_t i = 0; i < count; ++i) ys[i] = two_pi * static_cast<double>(i) / static_cast<double>(count);
    return ys;
}

ShiftInvarianceReport shift_invariance_check(const SpectrumSampler& sampler, const std::vector<double>& y_samples,
                                             const std::vector<double>& shifts) {
    ShiftInvarianceReport out;
    out.shifts = shifts;
    std::vector<Eigen::VectorXcd> base;
    for (double y : y_samples) base.push_back(sampler(y, 0.0));
    for (double s : shifts) {
        std::vector<Eigen::VectorXcd> moved;
        for (double y : y_samples) moved.push_back(sampler(y, s));
        double d = 0.0;
        for (const auto& set : moved) d = std::max(d, excess_over_family(set, sampler, 0.0, y_samples, base));
        for (const auto& set : base) d = std::max(d, excess_over_family(set, sampler, s, y_samples, moved));
        out.distances.push_back(d);
        out.max_distance = std::max(out.max_distance, d);
    }
    return out;
}

SubspaceProvider periodic_subspace_provider(const DiscreteSkewMap& map, const KoopmanProvider& koopman, const SpectralBin& bin,
                                            BasisDescriptor basis) {
    return [map, koopman, bin, basis](double y) { return periodic_subspace_at(map, y, koopman, bin, basis); };
}

Eigen::MatrixXcd discrete_eigenoperator_matrix(const DiscreteSkewMap& map, const KoopmanProvider& koopman,
                                               const SubspaceProvider& subspaces, int i, double y) {
    const double yi = base_iterate(map, y, i);
    const double yn = base_iterate(map, y, i + 1);
    return koopman(yi) * subspaces(yn).projection;
}

EigenoperatorSample discrete_eigenoperator(const DiscreteSkewMap& map, const KoopmanProvider& koopman,
                                           const SubspaceProvider& subspaces, int i, int j, double y) {
    const double yi = base_iterate(map, y, i);
    const double yn = base_iterate(map, y, i + 1);
    const FiberSubspace here = subspaces(yi);
    const FiberSubspace next = subspaces(yn);
    if (here.effective_rank() != next.effective_rank())
        throw NumericalError("subspace dimension changes along the orbit",
                             {static_cast<double>(here.effective_rank()), static_cast<double>(next.effective_rank())});
    EigenoperatorSample out;
    out.y = y;
    out.kind = EigenoperatorKind::discrete_M;
    out.time = i;
    out.j = j;
    BasisDescriptor desc;
    desc.kind = "frame";
    desc.extents = {static_cast<int>(here.effective_rank())};
    desc.size = here.effective_rank();
    out.matrix.rows = desc;
    out.matrix.cols = desc;
    out.matrix.entries = next.frame.adjoint() * koopman(yi) * next.frame;
    out.matrix.provenance = Provenance::composed;
    out.eigenvalues = out.matrix.entries.size() ? eigenvalues(out.matrix.entries) : Eigen::VectorXcd();
    return out;
}

DiscreteSpectrumReport discrete_eigenoperator_spectrum(const DiscreteSkewMap& map, const KoopmanProvider& koopman,
                                                       const SubspaceProvider& subspaces, int i, int j,
                                                       const std::vector<double>& y_samples, double tol) {
    DiscreteSpectrumReport out;
    std::vector<Eigen::VectorXcd> spectra;
    for (double y : y_samples) {
        auto sample = discrete_eigenoperator(map, koopman, subspaces, i, j, y);
        if (!out.samples.empty() && sample.matrix.entries.rows() != out.samples.front().matrix.entries.rows())
            throw NumericalError("subspace dimension varies across base samples");
        for (const auto& z : sample.eigenvalues) out.max_unit_circle_defect = std::max(out.max_unit_circle_defect, std::abs(std::abs(z) - 1.0));
        spectra.push_back(sample.eigenvalues);
        out.samples.push_back(std::move(sample));
    }
    out.spectrum = aggregate(y_samples, spectra, tol);
    return out;
}

double discrete_identity_residual(const DiscreteSkewMap& map, const KoopmanProvider& koopman,
                                  const SubspaceProvider& subspaces, int i, double y) {
    const Eigen::MatrixXcd lhs = discrete_w_matrix(map, y, i, koopman) * subspaces(base_iterate(map, y, i)).projection *
                                 discrete_eigenoperator_matrix(map, koopman, subspaces, i, y);
    const Eigen::MatrixXcd rhs = discrete_w_matrix(map, y, i + 1, koopman) * subspaces(base_iterate(map, y, i + 1)).projection;
    return (lhs - rhs).norm();
}

}  // namespace eigenop
