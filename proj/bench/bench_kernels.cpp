// OpenMP kernels against their serial reference versions.

#include <benchmark/benchmark.h>

#include <random>

#include "fgsr/kernels.hpp"
#include "fgsr/matrix.hpp"
#include "fgsr/random.hpp"

namespace k = fgsr::kernels;
using fgsr::DenseMatrix;

namespace {

DenseMatrix gaussian(std::size_t m, std::size_t n, std::uint64_t seed) {
    auto rng = fgsr::make_rng(seed, fgsr::Stream::Verification);
    DenseMatrix x(m, n);
    fgsr::fill_standard_normal(rng, x.values());
    return x;
}

k::SamplingPattern half_pattern(std::size_t m, std::size_t n) {
    auto rng = fgsr::make_rng(1, fgsr::Stream::Sampling);
    std::vector<std::uint32_t> ri, ci;
    for (std::uint32_t i = 0; i < m; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            if (fgsr::uniform01(rng) < 0.5) {
                ri.push_back(i);
                ci.push_back(j);
            }
    return k::SamplingPattern::from_sorted(m, n, std::move(ri), std::move(ci));
}

template <auto Fn>
void BM_gemm(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = gaussian(n, 30, 1), b = gaussian(30, n, 2);
    DenseMatrix c(n, n);
    for (auto _ : state) {
        Fn(a, b, c);
        benchmark::DoNotOptimize(c.values().data());
    }
}

template <auto Fn>
void BM_sampled_product(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto omega = half_pattern(n, n);
    const auto a = gaussian(n, 30, 3), b = gaussian(30, n, 4);
    std::vector<double> out(omega.nnz());
    for (auto _ : state) {
        Fn(a, b, omega, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(omega.nnz()));
}

template <auto Fn>
void BM_sparse_times_bt(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto omega = half_pattern(n, n);
    std::vector<double> vals(omega.nnz(), 1.0);
    const auto b = gaussian(30, n, 5);
    DenseMatrix out(n, 30);
    for (auto _ : state) {
        Fn(omega, vals, b, out);
        benchmark::DoNotOptimize(out.values().data());
    }
}

template <auto Fn>
void BM_at_times_sparse(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto omega = half_pattern(n, n);
    std::vector<double> vals(omega.nnz(), 1.0);
    const auto a = gaussian(n, 30, 6);
    DenseMatrix out(30, n);
    for (auto _ : state) {
        Fn(a, omega, vals, out);
        benchmark::DoNotOptimize(out.values().data());
    }
}

}  // namespace

BENCHMARK(BM_gemm<k::gemm>)->Arg(200)->Arg(500);
BENCHMARK(BM_gemm<k::ref::gemm>)->Arg(200)->Arg(500);
BENCHMARK(BM_sampled_product<k::sampled_product>)->Arg(200)->Arg(500);
BENCHMARK(BM_sampled_product<k::ref::sampled_product>)->Arg(200)->Arg(500);
BENCHMARK(BM_sparse_times_bt<k::sparse_times_bt>)->Arg(200)->Arg(500);
BENCHMARK(BM_sparse_times_bt<k::ref::sparse_times_bt>)->Arg(200)->Arg(500);
BENCHMARK(BM_at_times_sparse<k::at_times_sparse>)->Arg(200)->Arg(500);
BENCHMARK(BM_at_times_sparse<k::ref::at_times_sparse>)->Arg(200)->Arg(500);

BENCHMARK_MAIN();
