#include "eigenop/oseledets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "eigenop/error.hpp"

namespace eigenop {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace

std::string to_string(SubspaceOrigin origin) {
    switch (origin) {
        case SubspaceOrigin::restricted_eigvecs: return "restricted_eigvecs";
        case SubspaceOrigin::spectral_bin: return "spectral_bin";
    }
    return "unknown";
}

OperatorMatrix FiberSubspace::projection_operator() const {
    OperatorMatrix out;
    out.rows = basis;
    out.cols = basis;
    out.entries = projection;
    out.provenance = Provenance::composed;
    return out;
}

Orthonormalization orthonormalize(const Eigen::MatrixXcd& columns, double rank_tol) {
    Orthonormalization out;
    const Eigen::Index n = columns.rows();
    double scale = 0.0;
    for (Eigen::Index j = 0; j < columns.cols(); ++j) scale = std::max(scale, columns.col(j).norm());
    std::vector<Eigen::VectorXcd> kept;
    for (Eigen::Index j = 0; j < columns.cols(); ++j) {
        Eigen::VectorXcd v = columns.col(j);
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : kept) v -= q * q.dot(v);
        }
        const double r = v.norm();
        if (scale == 0.0 || r <= rank_tol * scale) {
            out.dropped.push_back(static_cast<std::size_t>(j));
            continue;
        }
        kept.push_back(v / r);
        out.kept.push_back(static_cast<std::size_t>(j));
    }
    out.frame.resize(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) out.frame.col(static_cast<Eigen::Index>(j)) = kept[j];
    return out;
}

FiberSubspace make_subspace(double y, const Eigen::MatrixXcd& columns, SubspaceOrigin origin, BasisDescriptor basis,
                            double rank_tol) {
    FiberSubspace out;
    out.y = y;
    out.origin = origin;
    out.basis = std::move(basis);
    out.requested_rank = static_cast<std::size_t>(columns.cols());
    auto on = orthonormalize(columns, rank_tol);
    out.frame = std::move(on.frame);
    out.dropped = std::move(on.dropped);
    out.projection = out.frame * out.frame.adjoint();
    if (out.projection.rows() == 0) out.projection = Eigen::MatrixXcd::Zero(columns.rows(), columns.rows());
    if (!out.dropped.empty()) {
        std::ostringstream msg;
        msg << "rank deficiency: requested " << out.requested_rank << ", effective " << out.effective_rank();
        out.warnings.push_back(msg.str());
    }
    return out;
}

Eigen::VectorXcd restrict_vector(const Eigen::VectorXcd& full, const TruncatedBasis& basis, double y) {
    if (!basis.is_skew()) throw ConfigurationError("restriction needs a skew basis");
    if (static_cast<std::size_t>(full.size()) != basis.size()) throw ConfigurationError("vector size does not match basis");
    const std::size_t fiber = basis.fiber_size();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(fiber));
    const std::size_t base = basis.size() / fiber;
    for (std::size_t b = 0; b < base; ++b) {
        const int k = basis.component(b * fiber, 0);
        const cplx phase = std::polar(1.0, k * y);
        out += phase * full.segment(static_cast<Eigen::Index>(b * fiber), static_cast<Eigen::Index>(fiber));
    }
    return out;
}

Eigen::MatrixXcd restrict_columns(const Eigen::MatrixXcd& full, const TruncatedBasis& basis, double y) {
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(basis.fiber_size()), full.cols());
    for (Eigen::Index j = 0; j < full.cols(); ++j) out.col(j) = restrict_vector(full.col(j), basis, y);
    return out;
}

FiberSubspace restrict_at_base(const Eigen::MatrixXcd& eigvecs, const TruncatedBasis& basis, double y, std::size_t d) {
    if (d > static_cast<std::size_t>(eigvecs.cols())) throw ConfigurationError("requested more eigenvectors than available");
    const Eigen::MatrixXcd cols = restrict_columns(eigvecs.leftCols(static_cast<Eigen::Index>(d)), basis, y);
    return make_subspace(y, cols, SubspaceOrigin::restricted_eigvecs, BasisDescriptor::fourier(basis.fiber_basis()));
}

double normalize_phase_angle(double phase) {
    double p = std::fmod(phase, two_pi);
    if (p < 0.0) p += two_pi;
    if (p >= two_pi) p -= two_pi;
    return p;
}

bool SpectralBin::contains(double phase) const {
    const double p = normalize_phase_angle(phase);
    return std::any_of(arcs.begin(), arcs.end(), [p](const SpectralArc& a) { return p >= a.begin && p < a.end; });
}

double SpectralBin::boundary_distance(double phase) const {
    const double p = normalize_phase_angle(phase);
    double best = std::numeric_limits<double>::infinity();
    auto circ = [](double a, double b) {
        const double d = std::abs(a - b);
        return std::min(d, two_pi - d);
    };
    // an end that is also the beginning of another arc of the bin is an interior seam
    auto seam = [&](double point) {
        for (const auto& a : arcs)
            if (circ(point, a.begin) < 1e-14) return true;
        return false;
    };
    for (const auto& a : arcs) {
        if (a.end - a.begin >= two_pi) continue;
        if (!seam(a.end)) best = std::min(best, circ(p, a.end));
        bool starts_a_seam = false;
        for (const auto& b : arcs)
            if (circ(b.end, a.begin) < 1e-14) starts_a_seam = true;
        if (!starts_a_seam) best = std::min(best, circ(p, a.begin));
    }
    return best;
}

double SpectralBin::measure() const {
    double m = 0.0;
    for (const auto& a : arcs) m += a.end - a.begin;
    return m;
}

SpectralBin full_circle() { return SpectralBin{{SpectralArc{0.0, two_pi}}}; }

std::vector<SpectralBin> bins_from_cuts(std::vector<double> cuts, int period) {
    if (period < 1) throw ConfigurationError("bin period must be positive");
    if (cuts.empty()) throw ConfigurationError("at least one cut point is required");
    const double width = two_pi / period;
    for (double& c : cuts) {
        c = std::fmod(c, width);
        if (c < 0.0) c += width;
    }
    std::sort(cuts.begin(), cuts.end());
    if (std::adjacent_find(cuts.begin(), cuts.end()) != cuts.end()) throw ConfigurationError("cut points must be distinct");
    std::vector<SpectralBin> bins;
    const std::size_t n = cuts.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double a = cuts[j];
        const double b = j + 1 < n ? cuts[j + 1] : cuts[0] + width;
        SpectralBin bin;
        for (int r = 0; r < period; ++r) {
            double lo = a + r * width;
            double hi = b + r * width;
            // split arcs that cross 2pi
            if (hi <= two_pi) {
                bin.arcs.push_back({lo, hi});
            } else if (lo >= two_pi) {
                bin.arcs.push_back({lo - two_pi, hi - two_pi});
            } else {
                bin.arcs.push_back({lo, two_pi});
                bin.arcs.push_back({0.0, hi - two_pi});
            }
        }
        std::sort(bin.arcs.begin(), bin.arcs.end(), [](const SpectralArc& x, const SpectralArc& y) { return x.begin < y.begin; });
        bins.push_back(std::move(bin));
    }
    return bins;
}

std::vector<SpectralBin> periodic_bins(std::size_t count, int period, double offset) {
    if (count == 0) throw ConfigurationError("bin count must be positive");
    if (period < 1) throw ConfigurationError("bin period must be positive");
    if (count == 1 && period == 1) return {full_circle()};
    const double width = two_pi / period;
    std::vector<double> cuts(count);
    for (std::size_t j = 0; j < count; ++j) cuts[j] = offset + width * static_cast<double>(j) / static_cast<double>(count);
    return bins_from_cuts(cuts, period);
}

bool is_partition(const std::vector<SpectralBin>& bins, double tol) {
    std::vector<SpectralArc> all;
    for (const auto& b : bins) all.insert(all.end(), b.arcs.begin(), b.arcs.end());
    std::sort(all.begin(), all.end(), [](const SpectralArc& x, const SpectralArc& y) { return x.begin < y.begin; });
    double cursor = 0.0;
    for (const auto& a : all) {
        if (std::abs(a.begin - cursor) > tol) return false;
        cursor = a.end;
    }
    return std::abs(cursor - two_pi) <= tol;
}

KoopmanProvider koopman_provider(const DiscreteSkewMap& map, const DiscreteFiberSpace& fiber) {
    return [map, fiber](double y) { return assemble_fiber_koopman(map, y, fiber).entries; };
}

Eigen::MatrixXcd block_operator(const DiscreteSkewMap& map, double y, const KoopmanProvider& koopman) {
    if (!map.base_period || *map.base_period < 1) throw ConfigurationError("base map must be periodic");
    const int n = *map.base_period;
    Eigen::MatrixXcd first = koopman(base_iterate(map, y, 1));
    const Eigen::Index m = first.rows();
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(n * m, n * m);
    for (int b = 0; b < n; ++b) {
        const Eigen::MatrixXcd blk = b == 0 ? first : koopman(base_iterate(map, y, b + 1));
        if (blk.rows() != m || blk.cols() != m) throw NumericalError("fiber Koopman dimension changed along the orbit");
        U.block(b * m, ((b + 1) % n) * m, m, m) = blk;
    }
    return U;
}

BlockSpectralData block_spectral_data(const DiscreteSkewMap& map, double y, const KoopmanProvider& koopman) {
    BlockSpectralData out;
    out.y = y;
    if (!map.base_period) throw ConfigurationError("base map must be periodic");
    out.period = *map.base_period;
    const Eigen::MatrixXcd U = block_operator(map, y, koopman);
    out.block = static_cast<std::size_t>(U.rows() / out.period);
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(U);
    if (schur.info() != Eigen::Success) throw NumericalError("Schur decomposition failed");
    const Eigen::MatrixXcd& T = schur.matrixT();
    out.schur_vectors = schur.matrixU();
    out.eigenvalues = T.diagonal();
    Eigen::MatrixXcd strict = T.triangularView<Eigen::StrictlyUpper>();
    out.normality_defect = strict.norm();
    out.phases.resize(out.eigenvalues.size());
    for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) out.phases(i) = normalize_phase_angle(std::arg(out.eigenvalues(i)));
    if (out.normality_defect > 1e-8 * std::max(1.0, U.norm()))
        throw NumericalError("block operator is not normal", {out.normality_defect});
    return out;
}

std::vector<FiberSubspace> block_components(const BlockSpectralData& data, const SpectralBin& bin, BasisDescriptor basis,
                                            std::vector<std::string>* warnings) {
    std::vector<Eigen::Index> picked;
    for (Eigen::Index i = 0; i < data.phases.size(); ++i) {
        if (bin.contains(data.phases(i))) picked.push_back(i);
        if (warnings && bin.boundary_distance(data.phases(i)) < 1e-10) {
            std::ostringstream msg;
            msg << "eigenvalue phase " << data.phases(i) << " lies within 1e-10 of a bin boundary";
            warnings->push_back(msg.str());
        }
    }
    const auto m = static_cast<Eigen::Index>(data.block);
    Eigen::MatrixXcd Q(data.schur_vectors.rows(), static_cast<Eigen::Index>(picked.size()));
    for (std::size_t j = 0; j < picked.size(); ++j) Q.col(static_cast<Eigen::Index>(j)) = data.schur_vectors.col(picked[j]);
    std::vector<FiberSubspace> out;
    for (int k = 0; k < data.period; ++k) {
        const Eigen::MatrixXcd rows = Q.middleRows(k * m, m);
        out.push_back(make_subspace(data.y, rows, SubspaceOrigin::spectral_bin, basis));
    }
    return out;
}

PeriodicDecomposition periodic_subspaces(const DiscreteSkewMap& map, double y, const KoopmanProvider& koopman,
                                         const std::vector<SpectralBin>& bins, BasisDescriptor basis) {
    if (bins.empty()) throw ConfigurationError("no spectral bins given");
    if (!map.base_period) throw ConfigurationError("base map must be periodic");
    PeriodicDecomposition out;
    const int n = *map.base_period;
    out.subspaces.assign(bins.size(), {});
    if (!is_partition(bins)) out.warnings.push_back("bins do not partition the circle");
    for (int k = 0; k < n; ++k) {
        const double yk = base_iterate(map, y, k);
        out.orbit.push_back(yk);
        const auto data = block_spectral_data(map, yk, koopman);
        for (std::size_t j = 0; j < bins.size(); ++j) {
            auto comps = block_components(data, bins[j], basis, k == 0 ? &out.warnings : nullptr);
            out.subspaces[j].push_back(std::move(comps.back()));
        }
    }
    return out;
}

FiberSubspace periodic_subspace_at(const DiscreteSkewMap& map, double y, const KoopmanProvider& koopman,
                                   const SpectralBin& bin, BasisDescriptor basis) {
    const auto data = block_spectral_data(map, y, koopman);
    std::vector<std::string> warnings;
    auto comps = block_components(data, bin, std::move(basis), &warnings);
    FiberSubspace out = std::move(comps.back());
    out.warnings.insert(out.warnings.end(), warnings.begin(), warnings.end());
    return out;
}

double operator_norm(const Eigen::MatrixXcd& A) {
    if (A.size() == 0) return 0.0;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A);
    return svd.singularValues()(0);
}

double equivariance_residual(const FiberSubspace& at_hy, const FiberSubspace& at_y, const Eigen::MatrixXcd& U) {
    const Eigen::Index m = U.rows();
    if (at_y.projection.rows() != m || at_hy.projection.rows() != m) throw ConfigurationError("projection size mismatch");
    const Eigen::MatrixXcd R = (Eigen::MatrixXcd::Identity(m, m) - at_y.projection) * U * at_hy.projection;
    return operator_norm(R);
}

double max_principal_angle(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
    if (A.cols() != B.cols()) return std::numbers::pi / 2.0;
    if (A.cols() == 0) return 0.0;
    const Eigen::MatrixXcd residual = B - A * (A.adjoint() * B);
    return std::asin(std::clamp(operator_norm(residual), 0.0, 1.0));
}

}  // namespace eigenop
