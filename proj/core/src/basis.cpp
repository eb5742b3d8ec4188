#include "eigenop/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eigenop/error.hpp"

namespace eigenop {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Contracts one axis of a row-major tensor: out[.., q, ..] = scale * sum_r kernel(q, r) in[.., r, ..].
std::vector<cplx> contract_axis(const std::vector<cplx>& data, std::vector<std::size_t>& dims,
                                std::size_t axis, std::size_t n_out, const std::vector<cplx>& kernel,
                                double scale) {
    const std::size_t n_in = dims[axis];
    std::size_t outer = 1;
    for (std::size_t d = 0; d < axis; ++d) outer *= dims[d];
    std::size_t inner = 1;
    for (std::size_t d = axis + 1; d < dims.size(); ++d) inner *= dims[d];

    std::vector<cplx> out(outer * n_out * inner);
    std::vector<cplx> terms(n_in);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < inner; ++i) {
            const cplx* src = data.data() + o * n_in * inner + i;
            for (std::size_t q = 0; q < n_out; ++q) {
                const cplx* krow = kernel.data() + q * n_in;
                for (std::size_t r = 0; r < n_in; ++r) terms[r] = krow[r] * src[r * inner];
                out[o * n_out * inner + q * inner + i] = scale * pairwise_sum(terms);
            }
        }
    }
    dims[axis] = n_out;
    return out;
}

std::vector<cplx> roots_of_unity(int n) {
    std::vector<cplx> r(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) r[p] = std::polar(1.0, two_pi * p / n);
    return r;
}

// kernel(q, r) = e^{sign i m_q x_r} for m_q in [-R, R] and grid nodes x_r.
std::vector<cplx> dft_kernel(int points, int radius, int sign, bool modes_are_rows) {
    const auto roots = roots_of_unity(points);
    const std::size_t nm = static_cast<std::size_t>(2 * radius + 1);
    std::vector<cplx> k(nm * static_cast<std::size_t>(points));
    for (std::size_t q = 0; q < nm; ++q) {
        const long m = static_cast<long>(q) - radius;
        for (int p = 0; p < points; ++p) {
            long e = (sign * m * p) % points;
            if (e < 0) e += points;
            const cplx v = roots[static_cast<std::size_t>(e)];
            if (modes_are_rows)
                k[q * points + p] = v;
            else
                k[static_cast<std::size_t>(p) * nm + q] = v;
        }
    }
    return k;
}

std::vector<cplx> box_transform(const Grid& grid, std::span<const cplx> samples, const std::vector<int>& radii) {
    std::vector<cplx> data(samples.begin(), samples.end());
    std::vector<std::size_t> dims;
    for (int p : grid.points()) dims.push_back(static_cast<std::size_t>(p));
    for (std::size_t a = dims.size(); a-- > 0;) {
        const int points = grid.points()[a];
        const auto kernel = dft_kernel(points, radii[a], -1, true);
        data = contract_axis(data, dims, a, static_cast<std::size_t>(2 * radii[a] + 1), kernel, 1.0 / points);
    }
    return data;
}

}  // namespace

std::string to_string(FactorRole role) { return role == FactorRole::base ? "base" : "fiber"; }

TruncatedBasis::TruncatedBasis(std::vector<int> cutoffs, std::vector<FactorRole> roles)
    : cutoffs_(std::move(cutoffs)), roles_(std::move(roles)) {
    if (cutoffs_.size() != roles_.size())
        throw ConfigurationError("basis: cutoff count does not match role count");
    if (cutoffs_.empty()) throw ConfigurationError("basis: at least one factor is required");
    for (int k : cutoffs_)
        if (k < 0) throw ConfigurationError("basis: cutoffs must be non-negative");
    strides_.assign(cutoffs_.size(), 1);
    size_ = 1;
    for (std::size_t d = cutoffs_.size(); d-- > 0;) {
        strides_[d] = size_;
        size_ *= static_cast<std::size_t>(2 * cutoffs_[d] + 1);
    }
}

TruncatedBasis::TruncatedBasis(std::vector<int> cutoffs)
    : TruncatedBasis(cutoffs, std::vector<FactorRole>(cutoffs.size(), FactorRole::fiber)) {}

TruncatedBasis TruncatedBasis::skew(int base_cutoff, std::vector<int> fiber_cutoffs) {
    std::vector<int> cutoffs{base_cutoff};
    cutoffs.insert(cutoffs.end(), fiber_cutoffs.begin(), fiber_cutoffs.end());
    std::vector<FactorRole> roles(cutoffs.size(), FactorRole::fiber);
    roles[0] = FactorRole::base;
    return TruncatedBasis(std::move(cutoffs), std::move(roles));
}

int TruncatedBasis::component(std::size_t index, std::size_t factor) const {
    const std::size_t width = static_cast<std::size_t>(2 * cutoffs_[factor] + 1);
    return static_cast<int>((index / strides_[factor]) % width) - cutoffs_[factor];
}

ModeIndex TruncatedBasis::mode(std::size_t index) const {
    ModeIndex m;
    m.components.resize(cutoffs_.size());
    for (std::size_t d = 0; d < cutoffs_.size(); ++d) m.components[d] = component(index, d);
    return m;
}

std::optional<std::size_t> TruncatedBasis::index_of(std::span<const int> components) const {
    if (components.size() != cutoffs_.size()) return std::nullopt;
    std::size_t idx = 0;
    for (std::size_t d = 0; d < cutoffs_.size(); ++d) {
        if (std::abs(components[d]) > cutoffs_[d]) return std::nullopt;
        idx += static_cast<std::size_t>(components[d] + cutoffs_[d]) * strides_[d];
    }
    return idx;
}

std::size_t TruncatedBasis::index_of_zero() const {
    std::vector<int> zero(cutoffs_.size(), 0);
    return *index_of(zero);
}

bool TruncatedBasis::is_skew() const noexcept {
    if (roles_.size() < 2 || roles_[0] != FactorRole::base) return false;
    return std::all_of(roles_.begin() + 1, roles_.end(), [](FactorRole r) { return r == FactorRole::fiber; });
}

TruncatedBasis TruncatedBasis::fiber_basis() const {
    std::vector<int> cutoffs;
    for (std::size_t d = 0; d < cutoffs_.size(); ++d)
        if (roles_[d] == FactorRole::fiber) cutoffs.push_back(cutoffs_[d]);
    if (cutoffs.empty()) throw ConfigurationError("basis: no fiber factors");
    return TruncatedBasis(std::move(cutoffs));
}

std::size_t TruncatedBasis::fiber_size() const {
    std::size_t n = 1;
    for (std::size_t d = 0; d < cutoffs_.size(); ++d)
        if (roles_[d] == FactorRole::fiber) n *= static_cast<std::size_t>(2 * cutoffs_[d] + 1);
    return n;
}

std::vector<ModeIndex> enumerate_modes(const TruncatedBasis& basis) {
    std::vector<ModeIndex> modes;
    modes.reserve(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) modes.push_back(basis.mode(i));
    return modes;
}

Grid::Grid(std::vector<int> points) : points_(std::move(points)) {
    size_ = 1;
    for (int p : points_) {
        if (p < 1) throw ConfigurationError("grid: points per factor must be positive");
        size_ *= static_cast<std::size_t>(p);
    }
}

Grid Grid::for_basis(const TruncatedBasis& basis, int oversampling) {
    std::vector<int> pts;
    for (int k : basis.cutoffs()) pts.push_back(std::max(oversampling * k, 2 * k + 1));
    return Grid(std::move(pts));
}

double Grid::node(std::size_t factor, int p) const { return two_pi * p / points_[factor]; }

void Grid::coordinates(std::size_t flat, std::span<double> out) const {
    for (std::size_t d = points_.size(); d-- > 0;) {
        const auto n = static_cast<std::size_t>(points_[d]);
        out[d] = node(d, static_cast<int>(flat % n));
        flat /= n;
    }
}

std::vector<double> Grid::coordinates(std::size_t flat) const {
    std::vector<double> x(points_.size());
    coordinates(flat, x);
    return x;
}

bool Grid::resolves(const TruncatedBasis& basis) const {
    if (basis.dimensionality() != points_.size()) return false;
    for (std::size_t d = 0; d < points_.size(); ++d)
        if (points_[d] < 2 * basis.cutoffs()[d] + 1) return false;
    return true;
}

Grid Grid::tail(std::size_t count) const {
    return Grid(std::vector<int>(points_.begin() + static_cast<long>(count), points_.end()));
}

FieldSample sample_field(const std::function<cplx(std::span<const double>)>& f, const Grid& grid) {
    FieldSample s{grid, Eigen::VectorXcd(static_cast<Eigen::Index>(grid.size()))};
    std::vector<double> x(grid.dimensionality());
    for (std::size_t n = 0; n < grid.size(); ++n) {
        grid.coordinates(n, x);
        s.values[static_cast<Eigen::Index>(n)] = f(x);
    }
    return s;
}

Eigen::VectorXcd analyze(const FieldSample& sample, const TruncatedBasis& basis) {
    if (!sample.grid.resolves(basis))
        throw ConfigurationError("analyze: grid has fewer than 2K+1 points in some factor (aliasing)");
    if (static_cast<std::size_t>(sample.values.size()) != sample.grid.size())
        throw ConfigurationError("analyze: sample length does not match grid");
    const auto data = box_transform(sample.grid, {sample.values.data(), sample.grid.size()}, basis.cutoffs());
    return Eigen::Map<const Eigen::VectorXcd>(data.data(), static_cast<Eigen::Index>(data.size()));
}

FieldSample synthesize(const Eigen::VectorXcd& coeffs, const TruncatedBasis& basis, const Grid& grid) {
    if (static_cast<std::size_t>(coeffs.size()) != basis.size())
        throw ConfigurationError("synthesize: coefficient length does not match basis");
    if (grid.dimensionality() != basis.dimensionality())
        throw ConfigurationError("synthesize: grid and basis dimensionality differ");
    std::vector<cplx> data(coeffs.data(), coeffs.data() + coeffs.size());
    std::vector<std::size_t> dims;
    for (int k : basis.cutoffs()) dims.push_back(static_cast<std::size_t>(2 * k + 1));
    for (std::size_t a = dims.size(); a-- > 0;) {
        const int points = grid.points()[a];
        const auto kernel = dft_kernel(points, basis.cutoffs()[a], +1, false);
        data = contract_axis(data, dims, a, static_cast<std::size_t>(points), kernel, 1.0);
    }
    return FieldSample{grid, Eigen::Map<const Eigen::VectorXcd>(data.data(), static_cast<Eigen::Index>(data.size()))};
}

cplx evaluate(const Eigen::VectorXcd& coeffs, const TruncatedBasis& basis, std::span<const double> point) {
    const std::size_t D = basis.dimensionality();
    std::vector<cplx> acc(coeffs.data(), coeffs.data() + coeffs.size());
    std::size_t len = acc.size();
    for (std::size_t a = D; a-- > 0;) {
        const int K = basis.cutoffs()[a];
        const std::size_t w = static_cast<std::size_t>(2 * K + 1);
        std::vector<cplx> phase(w);
        for (std::size_t q = 0; q < w; ++q) phase[q] = std::polar(1.0, (static_cast<int>(q) - K) * point[a]);
        const std::size_t outer = len / w;
        for (std::size_t o = 0; o < outer; ++o) {
            cplx s = 0.0;
            for (std::size_t q = 0; q < w; ++q) s += acc[o * w + q] * phase[q];
            acc[o] = s;
        }
        len = outer;
    }
    return acc[0];
}

cplx mode_derivative(const ModeIndex& mode, std::size_t factor) {
    return {0.0, static_cast<double>(mode.components.at(factor))};
}

bool CoefficientBox::contains(std::span<const int> n) const {
    for (std::size_t d = 0; d < radii.size(); ++d)
        if (std::abs(n[d]) > radii[d]) return false;
    return true;
}

cplx CoefficientBox::at(std::span<const int> n) const {
    std::size_t idx = 0;
    for (std::size_t d = 0; d < radii.size(); ++d) {
        if (std::abs(n[d]) > radii[d]) return 0.0;
        idx = idx * static_cast<std::size_t>(2 * radii[d] + 1) + static_cast<std::size_t>(n[d] + radii[d]);
    }
    return values[idx];
}

CoefficientBox fourier_box(const Grid& grid, std::span<const cplx> samples, std::vector<int> radii) {
    if (radii.size() != grid.dimensionality())
        throw ConfigurationError("fourier_box: radius count does not match grid");
    CoefficientBox box;
    box.values = box_transform(grid, samples, radii);
    box.radii = std::move(radii);
    return box;
}

cplx pairwise_sum(std::span<const cplx> terms) {
    if (terms.size() <= 8) {
        cplx s = 0.0;
        for (const auto& t : terms) s += t;
        return s;
    }
    const std::size_t half = terms.size() / 2;
    return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

double pairwise_sum(std::span<const double> terms) {
    if (terms.size() <= 8) {
        double s = 0.0;
        for (double t : terms) s += t;
        return s;
    }
    const std::size_t half = terms.size() / 2;
    return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

}  // namespace eigenop
