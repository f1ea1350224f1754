#pragma once

// Data-parallel inner loops shared by the solvers.
//
// Every kernel exists twice: the OpenMP version in fgsr::kernels and a plain
// serial loop in fgsr::kernels::ref. The reference versions are the test
// oracle for the parallel ones and the baseline in bench/.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fgsr/matrix.hpp"

namespace fgsr::kernels {

/// Row- and column-grouped index of a sparse sampling set Ω.
///
/// Entries are addressed by their position e in a row-major ordering;
/// row_ptr delimits each row's run, col_order lists entry positions grouped
/// by column and col_ptr delimits each column's run.
struct SamplingPattern {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint32_t> row_index;
    std::vector<std::uint32_t> col_index;
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> col_ptr;
    std::vector<std::size_t> col_order;

    std::size_t nnz() const noexcept { return row_index.size(); }

    /// Builds the pattern from row-major sorted (row, col) pairs.
    static SamplingPattern from_sorted(std::size_t rows, std::size_t cols,
                                       std::vector<std::uint32_t> row_index,
                                       std::vector<std::uint32_t> col_index);
};

void gemm(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c);
void gemm_at_b(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c);
void gemm_a_bt(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c);

/// Euclidean norm of every column.
std::vector<double> column_norms(const DenseMatrix& a);
/// Euclidean norm of every row.
std::vector<double> row_norms(const DenseMatrix& a);

/// out[e] = a.row(i_e) · b.col(j_e) for every sampled entry.
void sampled_product(const DenseMatrix& a, const DenseMatrix& b, const SamplingPattern& omega,
                     std::span<double> out);

/// out (rows×k) = S · bᵀ where S is the sparse matrix with values on Ω and b is k×cols.
void sparse_times_bt(const SamplingPattern& omega, std::span<const double> values,
                     const DenseMatrix& b, DenseMatrix& out);

/// out (k×cols) = aᵀ · S where a is rows×k.
void at_times_sparse(const DenseMatrix& a, const SamplingPattern& omega,
                     std::span<const double> values, DenseMatrix& out);

/// Elementwise sign(x)·max(0, |x| − lambda).
void soft_threshold(std::span<const double> in, double lambda, std::span<double> out);

namespace ref {

void gemm(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c);
void gemm_at_b(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c);
void gemm_a_bt(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c);
std::vector<double> column_norms(const DenseMatrix& a);
std::vector<double> row_norms(const DenseMatrix& a);
void sampled_product(const DenseMatrix& a, const DenseMatrix& b, const SamplingPattern& omega,
                     std::span<double> out);
void sparse_times_bt(const SamplingPattern& omega, std::span<const double> values,
                     const DenseMatrix& b, DenseMatrix& out);
void at_times_sparse(const DenseMatrix& a, const SamplingPattern& omega,
                     std::span<const double> values, DenseMatrix& out);
void soft_threshold(std::span<const double> in, double lambda, std::span<double> out);

}  // namespace ref

}  // namespace fgsr::kernels
