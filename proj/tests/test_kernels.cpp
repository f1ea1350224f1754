#include <gtest/gtest.h>

#include <random>

#include "fgsr/errors.hpp"
#include "fgsr/kernels.hpp"
#include "oracles.hpp"

namespace k = fgsr::kernels;
using fgsr::DenseMatrix;

namespace {

k::SamplingPattern random_pattern(std::size_t m, std::size_t n, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution keep(p);
    std::vector<std::uint32_t> ri, ci;
    for (std::uint32_t i = 0; i < m; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            if (keep(rng)) {
                ri.push_back(i);
                ci.push_back(j);
            }
    return k::SamplingPattern::from_sorted(m, n, std::move(ri), std::move(ci));
}

std::vector<double> random_values(std::size_t len, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> v(len);
    for (double& x : v) x = normal(rng);
    return v;
}

}  // namespace

TEST(Kernels, GemmVariantsMatchReference) {
    const auto a = oracle::gaussian(37, 11, 1);
    const auto b = oracle::gaussian(11, 23, 2);
    const auto c = oracle::gaussian(37, 23, 3);
    DenseMatrix p(37, 23), q(37, 23);
    k::gemm(a, b, p);
    k::ref::gemm(a, b, q);
    EXPECT_LT(oracle::max_abs_diff(p, q), 1e-12);

    DenseMatrix r(11, 23), s(11, 23);
    k::gemm_at_b(a, c, r);
    k::ref::gemm_at_b(a, c, s);
    EXPECT_LT(oracle::max_abs_diff(r, s), 1e-12);

    DenseMatrix t(37, 11), u(37, 11);
    k::gemm_a_bt(c, b, t);
    k::ref::gemm_a_bt(c, b, u);
    EXPECT_LT(oracle::max_abs_diff(t, u), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(u, oracle::naive_product(c, b.transpose())), 1e-12);
}

TEST(Kernels, GemmRejectsWrongOutputShape) {
    const auto a = oracle::gaussian(3, 2, 1);
    DenseMatrix out(2, 2);
    EXPECT_THROW(k::gemm(a, oracle::gaussian(2, 3, 2), out), fgsr::DimensionError);
}

TEST(Kernels, NormsMatchReference) {
    const auto a = oracle::gaussian(41, 9, 5);
    const auto cn = k::column_norms(a);
    const auto rn = k::row_norms(a);
    const auto cref = k::ref::column_norms(a);
    const auto rref = k::ref::row_norms(a);
    for (std::size_t j = 0; j < cn.size(); ++j) EXPECT_NEAR(cn[j], cref[j], 1e-13);
    for (std::size_t i = 0; i < rn.size(); ++i) EXPECT_NEAR(rn[i], rref[i], 1e-13);
}

TEST(Kernels, SparseKernelsMatchReferenceAndDense) {
    const std::size_t m = 29, n = 31, d = 6;
    const auto omega = random_pattern(m, n, 0.4, 9);
    const auto a = oracle::gaussian(m, d, 10);
    const auto b = oracle::gaussian(d, n, 11);
    const auto vals = random_values(omega.nnz(), 12);

    std::vector<double> s1(omega.nnz()), s2(omega.nnz());
    k::sampled_product(a, b, omega, s1);
    k::ref::sampled_product(a, b, omega, s2);
    const auto full = oracle::naive_product(a, b);
    for (std::size_t e = 0; e < omega.nnz(); ++e) {
        EXPECT_NEAR(s1[e], s2[e], 1e-12);
        EXPECT_NEAR(s1[e], full(omega.row_index[e], omega.col_index[e]), 1e-12);
    }

    DenseMatrix dense(m, n);
    for (std::size_t e = 0; e < omega.nnz(); ++e) dense(omega.row_index[e], omega.col_index[e]) = vals[e];

    DenseMatrix sb(m, d), sb_ref(m, d);
    k::sparse_times_bt(omega, vals, b, sb);
    k::ref::sparse_times_bt(omega, vals, b, sb_ref);
    EXPECT_LT(oracle::max_abs_diff(sb, sb_ref), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(sb, oracle::naive_product(dense, b.transpose())), 1e-12);

    DenseMatrix as(d, n), as_ref(d, n);
    k::at_times_sparse(a, omega, vals, as);
    k::ref::at_times_sparse(a, omega, vals, as_ref);
    EXPECT_LT(oracle::max_abs_diff(as, as_ref), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(as, oracle::naive_product(a.transpose(), dense)), 1e-12);
}

TEST(Kernels, PatternGroupsByColumn) {
    const auto omega = random_pattern(13, 7, 0.5, 3);
    ASSERT_EQ(omega.col_ptr.size(), 8u);
    EXPECT_EQ(omega.col_ptr.back(), omega.nnz());
    for (std::size_t j = 0; j < 7; ++j)
        for (std::size_t p = omega.col_ptr[j]; p < omega.col_ptr[j + 1]; ++p)
            EXPECT_EQ(omega.col_index[omega.col_order[p]], j);
    ASSERT_EQ(omega.row_ptr.size(), 14u);
    for (std::size_t i = 0; i < 13; ++i)
        for (std::size_t e = omega.row_ptr[i]; e < omega.row_ptr[i + 1]; ++e)
            EXPECT_EQ(omega.row_index[e], i);
}

TEST(Kernels, SoftThreshold) {
    const std::vector<double> in{5.0, -1.0, -3.0, 0.5, 0.0};
    std::vector<double> out(in.size()), ref(in.size());
    k::soft_threshold(in, 2.0, out);
    k::ref::soft_threshold(in, 2.0, ref);
    const std::vector<double> expected{3.0, 0.0, -1.0, 0.0, 0.0};
    EXPECT_EQ(out, expected);
    EXPECT_EQ(ref, expected);
}

TEST(Kernels, EmptyWidthProducesZeros) {
    const auto omega = random_pattern(5, 5, 0.6, 1);
    std::vector<double> out(omega.nnz(), 7.0);
    k::sampled_product(DenseMatrix(5, 0), DenseMatrix(0, 5), omega, out);
    for (double v : out) EXPECT_EQ(v, 0.0);
}
