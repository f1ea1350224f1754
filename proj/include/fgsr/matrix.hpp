#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace fgsr {

/// Dense real matrix stored row-major.
///
/// Entries are checked for finiteness when a matrix is built from a value
/// array; element access afterwards is unchecked.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols);
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix diagonal(std::span<const double> diag);
    static DenseMatrix diagonal(std::size_t rows, std::size_t cols, std::span<const double> diag);
    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> row(std::size_t i) noexcept { return {values_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {values_.data() + i * cols_, cols_};
    }

    std::vector<double> column(std::size_t j) const;
    DenseMatrix transpose() const;
    bool all_finite() const noexcept;

    DenseMatrix& operator+=(const DenseMatrix& other);
    DenseMatrix& operator-=(const DenseMatrix& other);
    DenseMatrix& operator*=(double scale) noexcept;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

DenseMatrix operator+(DenseMatrix lhs, const DenseMatrix& rhs);
DenseMatrix operator-(DenseMatrix lhs, const DenseMatrix& rhs);
DenseMatrix operator*(DenseMatrix lhs, double scale);
DenseMatrix operator*(double scale, DenseMatrix rhs);

/// Matrix product x·y.
DenseMatrix multiply(const DenseMatrix& x, const DenseMatrix& y);
/// xᵀ·y without forming the transpose.
DenseMatrix multiply_at_b(const DenseMatrix& x, const DenseMatrix& y);
/// x·yᵀ without forming the transpose.
DenseMatrix multiply_a_bt(const DenseMatrix& x, const DenseMatrix& y);

/// Thin singular value decomposition x = u·diag(s)·vt with k = min(rows, cols).
struct ThinSvd {
    DenseMatrix u;
    std::vector<double> s;
    DenseMatrix vt;
};

ThinSvd thin_svd(const DenseMatrix& x);

/// Singular values counted as nonzero: s_i > rank_tol · s_0.
inline constexpr double kRankRelativeTolerance = 1e-8;
std::size_t numeric_rank(std::span<const double> singular_values,
                         double rel_tol = kRankRelativeTolerance);
std::size_t numeric_rank(const DenseMatrix& x, double rel_tol = kRankRelativeTolerance);

/// Product of m×r and r×n standard normal matrices drawn from the seeded generator.
DenseMatrix random_low_rank(std::size_t m, std::size_t n, std::size_t r, std::uint64_t seed);

double frobenius_norm(const DenseMatrix& x) noexcept;
double frobenius_norm_sq(const DenseMatrix& x) noexcept;

/// Largest eigenvalue of the smaller Gram matrix of x (direct for order ≤ 512,
/// power iteration above).
double spectral_norm_sq_estimate(const DenseMatrix& x);

}  // namespace fgsr
