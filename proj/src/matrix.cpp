#include "fgsr/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "eigen_bridge.hpp"
#include "fgsr/errors.hpp"
#include "fgsr/kernels.hpp"
#include "fgsr/random.hpp"

namespace fgsr {

namespace {

std::string shape(const DenseMatrix& x) {
    return std::to_string(x.rows()) + "x" + std::to_string(x.cols());
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(op) + ": shapes " + shape(a) + " and " + shape(b) +
                             " differ");
    }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows * cols) {
        throw DimensionError("DenseMatrix: " + std::to_string(values_.size()) +
                             " values for shape " + std::to_string(rows) + "x" +
                             std::to_string(cols));
    }
    if (!all_finite()) throw InputError("DenseMatrix: non-finite entry");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> diag) {
    return diagonal(diag.size(), diag.size(), diag);
}

DenseMatrix DenseMatrix::diagonal(std::size_t rows, std::size_t cols,
                                  std::span<const double> diag) {
    if (diag.size() > std::min(rows, cols)) throw DimensionError("diagonal longer than shape");
    DenseMatrix out(rows, cols);
    for (std::size_t i = 0; i < diag.size(); ++i) out(i, i) = diag[i];
    if (!out.all_finite()) throw InputError("DenseMatrix: non-finite entry");
    return out;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t m = rows.size();
    const std::size_t n = m == 0 ? 0 : rows.begin()->size();
    std::vector<double> values;
    values.reserve(m * n);
    for (const auto& r : rows) {
        if (r.size() != n) throw DimensionError("from_rows: ragged rows");
        values.insert(values.end(), r.begin(), r.end());
    }
    return DenseMatrix(m, n, std::move(values));
}

std::vector<double> DenseMatrix::column(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

DenseMatrix DenseMatrix::transpose() const {
    DenseMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
}

bool DenseMatrix::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other) {
    require_same_shape(*this, other, "operator+=");
    for (std::size_t e = 0; e < values_.size(); ++e) values_[e] += other.values_[e];
    return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& other) {
    require_same_shape(*this, other, "operator-=");
    for (std::size_t e = 0; e < values_.size(); ++e) values_[e] -= other.values_[e];
    return *this;
}

DenseMatrix& DenseMatrix::operator*=(double scale) noexcept {
    for (double& v : values_) v *= scale;
    return *this;
}

DenseMatrix operator+(DenseMatrix lhs, const DenseMatrix& rhs) { return lhs += rhs; }
DenseMatrix operator-(DenseMatrix lhs, const DenseMatrix& rhs) { return lhs -= rhs; }
DenseMatrix operator*(DenseMatrix lhs, double scale) { return lhs *= scale; }
DenseMatrix operator*(double scale, DenseMatrix rhs) { return rhs *= scale; }

DenseMatrix multiply(const DenseMatrix& x, const DenseMatrix& y) {
    DenseMatrix out(x.rows(), y.cols());
    kernels::gemm(x, y, out);
    return out;
}

DenseMatrix multiply_at_b(const DenseMatrix& x, const DenseMatrix& y) {
    DenseMatrix out(x.cols(), y.cols());
    kernels::gemm_at_b(x, y, out);
    return out;
}

DenseMatrix multiply_a_bt(const DenseMatrix& x, const DenseMatrix& y) {
    DenseMatrix out(x.rows(), y.rows());
    kernels::gemm_a_bt(x, y, out);
    return out;
}

ThinSvd thin_svd(const DenseMatrix& x) {
    if (!x.all_finite()) throw InputError("thin_svd: input has non-finite entries");
    const std::size_t k = std::min(x.rows(), x.cols());
    if (k == 0) return {DenseMatrix(x.rows(), 0), {}, DenseMatrix(0, x.cols())};

    // Divide-and-conquer bidiagonal SVD; Eigen falls back to one-sided Jacobi
    // for small blocks. Its iteration limits are internal, so convergence is
    // judged from info() and the finiteness of the factors.
    Eigen::BDCSVD<detail::RowMajorMatrix> svd(detail::as_eigen(x),
                                              Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw SvdError("thin_svd: bidiagonal divide-and-conquer SVD of a " + shape(x) +
                       " matrix did not converge within Eigen's internal QR iteration budget");
    }
    ThinSvd out;
    out.u = detail::from_eigen(svd.matrixU());
    out.vt = detail::from_eigen(svd.matrixV().transpose());
    out.s.assign(svd.singularValues().data(), svd.singularValues().data() + k);
    if (!out.u.all_finite() || !out.vt.all_finite() ||
        !std::all_of(out.s.begin(), out.s.end(), [](double v) { return std::isfinite(v); })) {
        throw SvdError("thin_svd: non-finite factors for a " + shape(x) + " matrix");
    }
    return out;
}

std::size_t numeric_rank(std::span<const double> singular_values, double rel_tol) {
    if (singular_values.empty()) return 0;
    const double top = *std::max_element(singular_values.begin(), singular_values.end());
    if (top <= 0.0) return 0;
    return static_cast<std::size_t>(std::count_if(
        singular_values.begin(), singular_values.end(),
        [&](double s) { return s > rel_tol * top; }));
}

std::size_t numeric_rank(const DenseMatrix& x, double rel_tol) {
    return numeric_rank(thin_svd(x).s, rel_tol);
}

DenseMatrix random_low_rank(std::size_t m, std::size_t n, std::size_t r, std::uint64_t seed) {
    if (r > std::min(m, n)) {
        throw DimensionError("random_low_rank: rank " + std::to_string(r) + " exceeds min(" +
                             std::to_string(m) + ", " + std::to_string(n) + ")");
    }
    if (r == 0) return DenseMatrix(m, n);
    DenseMatrix left(m, r);
    DenseMatrix right(r, n);
    Rng left_rng = make_rng(seed, Stream::LowRankLeft);
    Rng right_rng = make_rng(seed, Stream::LowRankRight);
    fill_standard_normal(left_rng, left.values());
    fill_standard_normal(right_rng, right.values());
    return multiply(left, right);
}

double frobenius_norm_sq(const DenseMatrix& x) noexcept {
    double acc = 0.0;
    for (double v : x.values()) acc += v * v;
    return acc;
}

double frobenius_norm(const DenseMatrix& x) noexcept { return std::sqrt(frobenius_norm_sq(x)); }

namespace {
// Gram matrices up to this order go to a symmetric eigensolver; beyond it,
// power iteration.
constexpr std::size_t kDirectEigenLimit = 512;
}  // namespace

double spectral_norm_sq_estimate(const DenseMatrix& x) {
    if (x.empty()) return 0.0;
    const DenseMatrix gram = x.rows() < x.cols() ? multiply_a_bt(x, x) : multiply_at_b(x, x);
    const std::size_t k = gram.rows();
    if (k <= kDirectEigenLimit) {
        Eigen::SelfAdjointEigenSolver<detail::RowMajorMatrix> eig(detail::as_eigen(gram),
                                                                  Eigen::EigenvaluesOnly);
        if (eig.info() == Eigen::Success) return std::max(eig.eigenvalues().maxCoeff(), 0.0);
    }

    std::vector<double> v(k);
    for (std::size_t i = 0; i < k; ++i) v[i] = 1.0 + 0.25 * std::sin(1.0 + static_cast<double>(i));
    std::vector<double> w(k);

    auto normalize = [](std::vector<double>& u) {
        const double nrm = std::sqrt(std::inner_product(u.begin(), u.end(), u.begin(), 0.0));
        if (nrm > 0.0)
            for (double& e : u) e /= nrm;
        return nrm;
    };
    normalize(v);

    double estimate = 0.0;
    constexpr int kMaxIterations = 2000;
    for (int it = 0; it < kMaxIterations; ++it) {
        for (std::size_t i = 0; i < k; ++i) {
            const auto row = gram.row(i);
            w[i] = std::inner_product(row.begin(), row.end(), v.begin(), 0.0);
        }
        const double rayleigh = std::inner_product(w.begin(), w.end(), v.begin(), 0.0);
        if (normalize(w) == 0.0) return 0.0;
        std::swap(v, w);
        const bool settled = std::abs(rayleigh - estimate) <= 1e-13 * std::abs(rayleigh);
        estimate = rayleigh;
        if (settled) break;
    }
    return std::max(estimate, 0.0);
}

}  // namespace fgsr
