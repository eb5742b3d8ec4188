#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eigenop {

using cplx = std::complex<double>;

enum class FactorRole { base, fiber };

std::string to_string(FactorRole role);

struct ModeIndex {
    std::vector<int> components;

    bool operator==(const ModeIndex&) const = default;
};

/// Tensor Fourier modes e^{i m.x} with |m_d| <= K_d on a product of circles.
/// Modes are ordered lexicographically, first factor most significant, each
/// component running from -K_d to K_d.
class TruncatedBasis {
public:
    static constexpr const char* ordering_tag = "lexicographic-first-factor-major";

    TruncatedBasis() = default;
    TruncatedBasis(std::vector<int> cutoffs, std::vector<FactorRole> roles);
    explicit TruncatedBasis(std::vector<int> cutoffs);

    /// One base circle followed by the fiber circles.
    static TruncatedBasis skew(int base_cutoff, std::vector<int> fiber_cutoffs);

    std::size_t dimensionality() const noexcept { return cutoffs_.size(); }
    std::size_t size() const noexcept { return size_; }
    const std::vector<int>& cutoffs() const noexcept { return cutoffs_; }
    const std::vector<FactorRole>& roles() const noexcept { return roles_; }

    int component(std::size_t index, std::size_t factor) const;
    ModeIndex mode(std::size_t index) const;
    std::optional<std::size_t> index_of(std::span<const int> components) const;
    std::size_t index_of_zero() const;

    /// True when the first factor is the only base factor and at least one fiber factor follows.
    bool is_skew() const noexcept;
    TruncatedBasis fiber_basis() const;
    std::size_t fiber_size() const;

    bool operator==(const TruncatedBasis& other) const {
        return cutoffs_ == other.cutoffs_ && roles_ == other.roles_;
    }

private:
    std::vector<int> cutoffs_;
    std::vector<FactorRole> roles_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

std::vector<ModeIndex> enumerate_modes(const TruncatedBasis& basis);

/// Uniform tensor grid on [0, 2pi)^D with equal weights summing to one.
class Grid {
public:
    Grid() = default;
    explicit Grid(std::vector<int> points);

    /// Default grid: 4 points per unit of cutoff, never fewer than 2K+1.
    static Grid for_basis(const TruncatedBasis& basis, int oversampling = 4);

    std::size_t dimensionality() const noexcept { return points_.size(); }
    std::size_t size() const noexcept { return size_; }
    const std::vector<int>& points() const noexcept { return points_; }
    double weight() const noexcept { return size_ ? 1.0 / static_cast<double>(size_) : 0.0; }

    double node(std::size_t factor, int p) const;
    std::vector<double> coordinates(std::size_t flat) const;
    void coordinates(std::size_t flat, std::span<double> out) const;

    bool resolves(const TruncatedBasis& basis) const;
    /// Drops the leading `count` factors.
    Grid tail(std::size_t count) const;

private:
    std::vector<int> points_;
    std::size_t size_ = 0;
};

struct FieldSample {
    Grid grid;
    Eigen::VectorXcd values;
};

/// Samples f at every node, row-major in node index.
FieldSample sample_field(const std::function<cplx(std::span<const double>)>& f, const Grid& grid);

/// Quadrature coefficients c_m = sum_x w conj(e_m(x)) f(x). Throws ConfigurationError
/// when the grid cannot resolve the basis.
Eigen::VectorXcd analyze(const FieldSample& sample, const TruncatedBasis& basis);

FieldSample synthesize(const Eigen::VectorXcd& coeffs, const TruncatedBasis& basis, const Grid& grid);

/// Pointwise evaluation of sum_m c_m e^{i m.x} at an arbitrary point.
cplx evaluate(const Eigen::VectorXcd& coeffs, const TruncatedBasis& basis, std::span<const double> point);

cplx mode_derivative(const ModeIndex& mode, std::size_t factor);

/// Quadrature coefficients on the full box |n_d| <= radii[d], without any
/// aliasing check. Row-major in the box, first factor most significant.
struct CoefficientBox {
    std::vector<int> radii;
    std::vector<cplx> values;

    cplx at(std::span<const int> n) const;
    bool contains(std::span<const int> n) const;
};

CoefficientBox fourier_box(const Grid& grid, std::span<const cplx> samples, std::vector<int> radii);

/// Pairwise (tree) summation with a fixed split rule.
cplx pairwise_sum(std::span<const cplx> terms);
double pairwise_sum(std::span<const double> terms);

}  // namespace eigenop
