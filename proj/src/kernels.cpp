#include "fgsr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fgsr/errors.hpp"

namespace fgsr::kernels {

namespace {

void require_shape(const DenseMatrix& c, std::size_t rows, std::size_t cols) {
    if (c.rows() != rows || c.cols() != cols) {
        throw DimensionError("kernel output has shape " + std::to_string(c.rows()) + "x" +
                             std::to_string(c.cols()) + ", expected " + std::to_string(rows) +
                             "x" + std::to_string(cols));
    }
}

using Index = std::ptrdiff_t;

}  // namespace

SamplingPattern SamplingPattern::from_sorted(std::size_t rows, std::size_t cols,
                                             std::vector<std::uint32_t> row_index,
                                             std::vector<std::uint32_t> col_index) {
    if (row_index.size() != col_index.size()) {
        throw DimensionError("sampling pattern row/col index lengths differ");
    }
    SamplingPattern p;
    p.rows = rows;
    p.cols = cols;
    p.row_index = std::move(row_index);
    p.col_index = std::move(col_index);
    const std::size_t nnz = p.row_index.size();

    p.row_ptr.assign(rows + 1, 0);
    p.col_ptr.assign(cols + 1, 0);
    for (std::size_t e = 0; e < nnz; ++e) {
        ++p.row_ptr[p.row_index[e] + 1];
        ++p.col_ptr[p.col_index[e] + 1];
    }
    std::partial_sum(p.row_ptr.begin(), p.row_ptr.end(), p.row_ptr.begin());
    std::partial_sum(p.col_ptr.begin(), p.col_ptr.end(), p.col_ptr.begin());

    // Entries are row-major, so a stable bucket pass keeps rows ascending within each column.
    p.col_order.resize(nnz);
    std::vector<std::size_t> next(p.col_ptr.begin(), p.col_ptr.end() - 1);
    for (std::size_t e = 0; e < nnz; ++e) p.col_order[next[p.col_index[e]]++] = e;
    return p;
}

void gemm(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c) {
    if (a.cols() != b.rows()) throw DimensionError("gemm: inner dimensions differ");
    require_shape(c, a.rows(), b.cols());
    const Index m = static_cast<Index>(a.rows());
    const std::size_t k = a.cols();
    const std::size_t n = b.cols();
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < m; ++i) {
        double* ci = c.row(i).data();
        std::fill(ci, ci + n, 0.0);
        const double* ai = a.row(i).data();
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b.row(p).data();
            for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

void gemm_at_b(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c) {
    if (a.rows() != b.rows()) throw DimensionError("gemm_at_b: row counts differ");
    require_shape(c, a.cols(), b.cols());
    const std::size_t m = a.rows();
    const Index k = static_cast<Index>(a.cols());
    const std::size_t n = b.cols();
#pragma omp parallel for schedule(static)
    for (Index p = 0; p < k; ++p) {
        double* cp = c.row(p).data();
        std::fill(cp, cp + n, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double aip = a(i, p);
            if (aip == 0.0) continue;
            const double* bi = b.row(i).data();
            for (std::size_t j = 0; j < n; ++j) cp[j] += aip * bi[j];
        }
    }
}

void gemm_a_bt(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c) {
    if (a.cols() != b.cols()) throw DimensionError("gemm_a_bt: column counts differ");
    require_shape(c, a.rows(), b.rows());
    const Index m = static_cast<Index>(a.rows());
    const std::size_t k = a.cols();
    const std::size_t n = b.rows();
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < m; ++i) {
        const double* ai = a.row(i).data();
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = b.row(j).data();
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
            c(i, j) = acc;
        }
    }
}

std::vector<double> column_norms(const DenseMatrix& a) {
    const Index d = static_cast<Index>(a.cols());
    const std::size_t m = a.rows();
    std::vector<double> out(a.cols(), 0.0);
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < d; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += a(i, j) * a(i, j);
        out[j] = std::sqrt(acc);
    }
    return out;
}

std::vector<double> row_norms(const DenseMatrix& a) {
    const Index m = static_cast<Index>(a.rows());
    std::vector<double> out(a.rows(), 0.0);
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < m; ++i) {
        double acc = 0.0;
        for (double v : a.row(i)) acc += v * v;
        out[i] = std::sqrt(acc);
    }
    return out;
}

void sampled_product(const DenseMatrix& a, const DenseMatrix& b, const SamplingPattern& omega,
                     std::span<double> out) {
    if (a.cols() != b.rows() || a.rows() != omega.rows || b.cols() != omega.cols) {
        throw DimensionError("sampled_product: factor shapes do not match the pattern");
    }
    if (out.size() != omega.nnz()) throw DimensionError("sampled_product: output length");
    const std::size_t k = a.cols();
    const DenseMatrix bt = b.transpose();
    const Index m = static_cast<Index>(omega.rows);
#pragma omp parallel for schedule(dynamic, 16)
    for (Index i = 0; i < m; ++i) {
        const double* ai = a.row(i).data();
        for (std::size_t e = omega.row_ptr[i]; e < omega.row_ptr[i + 1]; ++e) {
            const double* bj = bt.row(omega.col_index[e]).data();
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
            out[e] = acc;
        }
    }
}

void sparse_times_bt(const SamplingPattern& omega, std::span<const double> values,
                     const DenseMatrix& b, DenseMatrix& out) {
    if (b.cols() != omega.cols || values.size() != omega.nnz()) {
        throw DimensionError("sparse_times_bt: operand shapes do not match the pattern");
    }
    require_shape(out, omega.rows, b.rows());
    const std::size_t k = b.rows();
    const DenseMatrix bt = b.transpose();
    const Index m = static_cast<Index>(omega.rows);
#pragma omp parallel for schedule(dynamic, 16)
    for (Index i = 0; i < m; ++i) {
        double* oi = out.row(i).data();
        std::fill(oi, oi + k, 0.0);
        for (std::size_t e = omega.row_ptr[i]; e < omega.row_ptr[i + 1]; ++e) {
            const double v = values[e];
            const double* bj = bt.row(omega.col_index[e]).data();
            for (std::size_t p = 0; p < k; ++p) oi[p] += v * bj[p];
        }
    }
}

void at_times_sparse(const DenseMatrix& a, const SamplingPattern& omega,
                     std::span<const double> values, DenseMatrix& out) {
    if (a.rows() != omega.rows || values.size() != omega.nnz()) {
        throw DimensionError("at_times_sparse: operand shapes do not match the pattern");
    }
    require_shape(out, a.cols(), omega.cols);
    const std::size_t k = a.cols();
    DenseMatrix out_t(omega.cols, k);
    const Index n = static_cast<Index>(omega.cols);
#pragma omp parallel for schedule(dynamic, 16)
    for (Index j = 0; j < n; ++j) {
        double* oj = out_t.row(j).data();
        for (std::size_t t = omega.col_ptr[j]; t < omega.col_ptr[j + 1]; ++t) {
            const std::size_t e = omega.col_order[t];
            const double v = values[e];
            const double* ai = a.row(omega.row_index[e]).data();
            for (std::size_t p = 0; p < k; ++p) oj[p] += v * ai[p];
        }
    }
    out = out_t.transpose();
}

void soft_threshold(std::span<const double> in, double lambda, std::span<double> out) {
    if (in.size() != out.size()) throw DimensionError("soft_threshold: length mismatch");
    const Index len = static_cast<Index>(in.size());
#pragma omp parallel for schedule(static)
    for (Index e = 0; e < len; ++e) {
        const double x = in[e];
        const double mag = std::abs(x) - lambda;
        out[e] = mag > 0.0 ? std::copysign(mag, x) : 0.0;
    }
}

namespace ref {

void gemm(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c) {
    if (a.cols() != b.rows()) throw DimensionError("gemm: inner dimensions differ");
    require_shape(c, a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < a.cols(); ++p) acc += a(i, p) * b(p, j);
            c(i, j) = acc;
        }
    }
}

void gemm_at_b(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c) {
    if (a.rows() != b.rows()) throw DimensionError("gemm_at_b: row counts differ");
    require_shape(c, a.cols(), b.cols());
    for (std::size_t p = 0; p < a.cols(); ++p) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < a.rows(); ++i) acc += a(i, p) * b(i, j);
            c(p, j) = acc;
        }
    }
}

void gemm_a_bt(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c) {
    if (a.cols() != b.cols()) throw DimensionError("gemm_a_bt: column counts differ");
    require_shape(c, a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < a.cols(); ++p) acc += a(i, p) * b(j, p);
            c(i, j) = acc;
        }
    }
}

std::vector<double> column_norms(const DenseMatrix& a) {
    std::vector<double> out(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[j] += a(i, j) * a(i, j);
    for (double& v : out) v = std::sqrt(v);
    return out;
}

std::vector<double> row_norms(const DenseMatrix& a) {
    std::vector<double> out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * a(i, j);
        out[i] = std::sqrt(out[i]);
    }
    return out;
}

void sampled_product(const DenseMatrix& a, const DenseMatrix& b, const SamplingPattern& omega,
                     std::span<double> out) {
    if (out.size() != omega.nnz()) throw DimensionError("sampled_product: output length");
    for (std::size_t e = 0; e < omega.nnz(); ++e) {
        double acc = 0.0;
        for (std::size_t p = 0; p < a.cols(); ++p)
            acc += a(omega.row_index[e], p) * b(p, omega.col_index[e]);
        out[e] = acc;
    }
}

void sparse_times_bt(const SamplingPattern& omega, std::span<const double> values,
                     const DenseMatrix& b, DenseMatrix& out) {
    require_shape(out, omega.rows, b.rows());
    std::fill(out.values().begin(), out.values().end(), 0.0);
    for (std::size_t e = 0; e < omega.nnz(); ++e)
        for (std::size_t p = 0; p < b.rows(); ++p)
            out(omega.row_index[e], p) += values[e] * b(p, omega.col_index[e]);
}

void at_times_sparse(const DenseMatrix& a, const SamplingPattern& omega,
                     std::span<const double> values, DenseMatrix& out) {
    require_shape(out, a.cols(), omega.cols);
    std::fill(out.values().begin(), out.values().end(), 0.0);
    for (std::size_t e = 0; e < omega.nnz(); ++e)
        for (std::size_t p = 0; p < a.cols(); ++p)
            out(p, omega.col_index[e]) += values[e] * a(omega.row_index[e], p);
}

void soft_threshold(std::span<const double> in, double lambda, std::span<double> out) {
    if (in.size() != out.size()) throw DimensionError("soft_threshold: length mismatch");
    for (std::size_t e = 0; e < in.size(); ++e) {
        const double x = in[e];
        out[e] = x > lambda ? x - lambda : (x < -lambda ? x + lambda : 0.0);
    }
}

}  // namespace ref

}  // namespace fgsr::kernels
