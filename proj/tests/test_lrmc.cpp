#include <gtest/gtest.h>

#include <cmath>

#include "fgsr/errors.hpp"
#include "fgsr/experiments.hpp"
#include "fgsr/lrmc.hpp"
#include "oracles.hpp"

using fgsr::DenseMatrix;
using fgsr::ObservationSet;
using fgsr::SolverConfig;

namespace {

ObservationSet fully_observed(const DenseMatrix& x) {
    std::vector<fgsr::Observation> all;
    for (std::uint32_t i = 0; i < x.rows(); ++i)
        for (std::uint32_t j = 0; j < x.cols(); ++j) all.push_back({i, j, x(i, j)});
    return ObservationSet(x.rows(), x.cols(), std::move(all));
}

SolverConfig with_width(std::size_t d) {
    SolverConfig c;
    c.d = d;
    return c;
}

void expect_no_reactivation(const std::vector<std::size_t>& ranks) {
    for (std::size_t k = 1; k < ranks.size(); ++k) EXPECT_LE(ranks[k], ranks[k - 1]);
}

void expect_monotone(const std::vector<double>& trace) {
    for (std::size_t k = 1; k < trace.size(); ++k)
        EXPECT_LE(trace[k], trace[k - 1] + 1e-12 * std::max(1.0, std::abs(trace[k - 1])))
            << "at iteration " << k;
}

void expect_stopping_rule(const fgsr::RecoveryResult& r, const SolverConfig& c) {
    ASSERT_EQ(r.rel_change_trace.size(), r.iterations);
    ASSERT_EQ(r.objective_trace.size(), r.iterations);
    if (r.converged) {
        EXPECT_LT(r.rel_change_trace.back(), c.rel_tol);
        for (std::size_t k = 0; k + 1 < r.iterations; ++k) EXPECT_GE(r.rel_change_trace[k], c.rel_tol);
    } else {
        EXPECT_EQ(r.iterations, c.max_iters);
    }
}

}  // namespace

TEST(DefaultRankHeuristic, Examples) {
    std::vector<fgsr::Observation> e;
    for (std::uint32_t k = 0; k < 5000; ++k) e.push_back({k / 100, k % 100, 1.0});
    EXPECT_EQ(fgsr::default_rank_heuristic(ObservationSet(100, 100, e)), 25u);
    EXPECT_EQ(fgsr::default_rank_heuristic(ObservationSet(100, 100, {{0, 0, 1.0}})), 1u);
    std::vector<fgsr::Observation> big;
    for (std::uint32_t k = 0; k < 75000; ++k) big.push_back({k / 500, k % 500, 1.0});
    EXPECT_EQ(fgsr::default_rank_heuristic(ObservationSet(500, 500, big)), 75u);
}

TEST(SolverConfig, Validation) {
    SolverConfig c;
    c.alpha = 0.0;
    EXPECT_THROW(c.validate(), fgsr::InputError);
    c = SolverConfig{};
    c.max_iters = 0;
    EXPECT_THROW(c.validate(), fgsr::InputError);
    c = SolverConfig{};
    c.rel_tol = -1.0;
    EXPECT_THROW(c.validate(), fgsr::InputError);
    EXPECT_THROW(fgsr::solve_noiseless_admm(ObservationSet(3, 3, {}), SolverConfig{}),
                 fgsr::InputError);
}

TEST(NoiselessAdmm, RecoversSmallInstance) {
    const auto inst = fgsr::gen_lrmc_instance(100, 100, 5, 0.5, fgsr::kInfiniteSnr, 3);
    const auto cfg = with_width(10);
    const auto r = fgsr::solve_noiseless_admm(inst.omega, cfg);
    EXPECT_LE(fgsr::relative_error(inst.m_true, r.x_hat), 1e-3);
    EXPECT_EQ(r.revealed_rank, 5u);
    EXPECT_EQ(r.revealed_rank, r.factors.active_count());
    expect_no_reactivation(r.rank_trace);
    expect_stopping_rule(r, cfg);
}

TEST(NoiselessAdmm, ObservedEntriesAreExact) {
    const auto inst = fgsr::gen_lrmc_instance(40, 30, 3, 0.6, fgsr::kInfiniteSnr, 8);
    SolverConfig cfg = with_width(6);
    cfg.max_iters = 25;  // far from converged: the constraint must still hold
    const auto r = fgsr::solve_noiseless_admm(inst.omega, cfg);
    for (const auto& e : inst.omega.entries()) EXPECT_EQ(r.x_hat(e.row, e.col), e.value);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iterations, 25u);
}

TEST(NoiselessAdmm, FullyObserved) {
    const auto m = fgsr::random_low_rank(30, 25, 3, 4);
    const auto r = fgsr::solve_noiseless_admm(fully_observed(m), with_width(6));
    EXPECT_EQ(r.x_hat, m);
    EXPECT_LE(oracle::rel_frob_diff(r.factors.product(), m), 1e-3);
}

TEST(NoiselessAdmm, GroupBPenaltyAlsoRecovers) {
    const auto inst = fgsr::gen_lrmc_instance(80, 80, 4, 0.5, fgsr::kInfiniteSnr, 12);
    SolverConfig cfg = with_width(8);
    cfg.b_penalty = fgsr::BPenalty::GroupL2;
    const auto r = fgsr::solve_noiseless_admm(inst.omega, cfg);
    EXPECT_LE(fgsr::relative_error(inst.m_true, r.x_hat), 1e-2);
}

TEST(NoiselessAdmm, DefaultWidthFromHeuristic) {
    const auto inst = fgsr::gen_lrmc_instance(60, 60, 3, 0.5, fgsr::kInfiniteSnr, 13);
    const auto r = fgsr::solve_noiseless_admm(inst.omega, SolverConfig{});
    EXPECT_EQ(r.factors.width(), fgsr::default_rank_heuristic(inst.omega));
    EXPECT_LE(fgsr::relative_error(inst.m_true, r.x_hat), 1e-3);
}

TEST(NoiselessAdmm, DeterministicUnderSeed) {
    const auto inst = fgsr::gen_lrmc_instance(40, 40, 3, 0.5, fgsr::kInfiniteSnr, 21);
    const auto r1 = fgsr::solve_noiseless_admm(inst.omega, with_width(6));
    const auto r2 = fgsr::solve_noiseless_admm(inst.omega, with_width(6));
    EXPECT_EQ(r1.x_hat, r2.x_hat);
    EXPECT_EQ(r1.objective_trace, r2.objective_trace);
}

TEST(NoisyPalm, MonotoneAndRankRevealing) {
    const auto inst = fgsr::gen_lrmc_instance(60, 50, 4, 0.5, 10.0, 5);
    SolverConfig cfg = with_width(12);
    cfg.beta = 0.5;
    const auto r = fgsr::solve_noisy_palm(inst.omega, cfg);
    expect_monotone(r.objective_trace);
    expect_no_reactivation(r.rank_trace);
    expect_stopping_rule(r, cfg);
    EXPECT_EQ(r.revealed_rank, r.factors.active_count());
    EXPECT_LT(r.revealed_rank, 12u);
}

TEST(NoisyPalm, BeatsFNuclearOnNoisyInstance) {
    double fgsr_err = 0.0, fn_err = 0.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto inst = fgsr::gen_lrmc_instance(100, 100, 5, 0.5, 10.0, seed);
        SolverConfig cfg = with_width(10);
        cfg.beta = 0.5;
        fgsr_err += fgsr::relative_error(inst.m_true, fgsr::solve_noisy_palm(inst.omega, cfg).x_hat);
        cfg.gamma = 0.5;
        fn_err += fgsr::relative_error(inst.m_true, fgsr::solve_f_nuclear(inst.omega, cfg).x_hat);
    }
    EXPECT_LT(fgsr_err, fn_err);
}

TEST(NoisyPalm, LargeBetaFullObservationRecovers) {
    const auto m = fgsr::random_low_rank(30, 20, 3, 6);
    SolverConfig cfg = with_width(5);
    cfg.beta = 1e8;
    cfg.rel_tol = 1e-10;
    cfg.max_iters = 3000;
    const auto r = fgsr::solve_noisy_palm(fully_observed(m), cfg);
    EXPECT_LE(fgsr::relative_error(m, r.x_hat), 1e-6);
}

TEST(NoisyPalm, ConvergedFactorsAreAStepFixedPoint) {
    const auto inst = fgsr::gen_lrmc_instance(40, 40, 3, 0.4, 20.0, 7);
    SolverConfig cfg = with_width(6);
    cfg.beta = 2.0;
    cfg.rel_tol = 1e-13;
    cfg.max_iters = 20000;
    const auto r = fgsr::solve_noisy_palm(inst.omega, cfg);

    // Back to normalized units, keeping only the active columns.
    const double s = r.data_scale;
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < r.factors.width(); ++j)
        if (r.factors.active_columns[j]) cols.push_back(j);
    DenseMatrix a(40, cols.size()), b(cols.size(), 40);
    for (std::size_t k = 0; k < cols.size(); ++k) {
        for (std::size_t i = 0; i < 40; ++i) a(i, k) = r.factors.a(i, cols[k]) / std::sqrt(s);
        for (std::size_t j = 0; j < 40; ++j) b(k, j) = r.factors.b(cols[k], j) / std::sqrt(s);
    }
    const auto ab = oracle::naive_product(a, b);
    DenseMatrix resid(40, 40);
    for (const auto& e : inst.omega.entries()) resid(e.row, e.col) = ab(e.row, e.col) - e.value / s;
    const auto grad = oracle::naive_product(resid, b.transpose());
    const double sb = oracle::singular_values(b).front();
    const double l = sb * sb + cfg.step_safety;
    const auto stepped = fgsr::prox_group_l2(a - grad * (1.0 / l), (1.0 / cfg.beta) / l);
    // The product settles long before the factors stop drifting along the
    // nearly flat rebalancing directions, so this is looser than the exact case below.
    EXPECT_LE(oracle::rel_frob_diff(stepped, a), 1e-4);
}

TEST(NoisyPalm, OptimalFactorsAreAStepFixedPoint) {
    // Data M_e = A*B* + G with G chosen so that β·G·B*ᵀ is the subgradient
    // a_j/‖a_j‖ of the group norm: then A* minimizes the A-subproblem with B* fixed.
    const auto x = fgsr::random_low_rank(12, 10, 3, 19);
    fgsr::FgsrSpec spec;
    spec.alpha = 0.7;
    const auto opt = fgsr::optimal_factors(x, spec, 3);
    const double beta = 3.0;
    const auto& a = opt.a;
    const auto& b = opt.b;
    ASSERT_LT(std::abs(oracle::naive_product(b, b.transpose())(0, 1)), 1e-10);
    DenseMatrix g(12, 10);
    for (std::size_t j = 0; j < 3; ++j) {
        double na = 0.0, nb = 0.0;
        for (std::size_t i = 0; i < 12; ++i) na += a(i, j) * a(i, j);
        for (std::size_t k = 0; k < 10; ++k) nb += b(j, k) * b(j, k);
        for (std::size_t i = 0; i < 12; ++i)
            for (std::size_t k = 0; k < 10; ++k) g(i, k) += a(i, j) / std::sqrt(na) * b(j, k) / nb / beta;
    }
    const auto m_e = x + g;
    const auto resid = m_e - oracle::naive_product(a, b);
    const double sb = oracle::singular_values(b).front();
    const double l = beta * sb * sb + 1e-6;
    const auto stepped =
        fgsr::prox_group_l2(a + oracle::naive_product(resid, b.transpose()) * (beta / l), 1.0 / l);
    EXPECT_LE(oracle::max_abs_diff(stepped, a), 1e-8);
}

TEST(Generalized, QOneMatchesNoisyPalm) {
    const auto inst = fgsr::gen_lrmc_instance(50, 40, 3, 0.5, 10.0, 9);
    SolverConfig noisy = with_width(8);
    noisy.beta = 2.0;
    SolverConfig gen = with_width(8);
    gen.gamma = 0.5;
    const auto r1 = fgsr::solve_noisy_palm(inst.omega, noisy);
    const auto r2 = fgsr::solve_generalized(inst.omega, gen);
    EXPECT_EQ(r1.x_hat, r2.x_hat);
    EXPECT_EQ(r1.rank_trace, r2.rank_trace);
    ASSERT_EQ(r1.objective_trace.size(), r2.objective_trace.size());
    for (std::size_t k = 0; k < r1.objective_trace.size(); ++k)
        EXPECT_NEAR(r1.objective_trace[k], 2.0 * r2.objective_trace[k], 1e-12 * r1.objective_trace[k]);
}

TEST(Generalized, ReweightedTraceIsMonotone) {
    const auto inst = fgsr::gen_lrmc_instance(60, 60, 4, 0.5, 10.0, 10);
    SolverConfig cfg = with_width(12);
    cfg.q = fgsr::GroupExponent::from_value(0.5);
    cfg.gamma = 4.0;
    const auto r = fgsr::solve_generalized(inst.omega, cfg);
    expect_monotone(r.objective_trace);
    expect_no_reactivation(r.rank_trace);
    expect_stopping_rule(r, cfg);
}

TEST(Generalized, SmallerQIsNoWorseOnAverage) {
    double e1 = 0.0, e2 = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto inst = fgsr::gen_lrmc_instance(80, 80, 5, 0.5, 10.0, 100 + seed);
        SolverConfig cfg = with_width(12);
        cfg.gamma = 2.0;
        e1 += fgsr::relative_error(inst.m_true, fgsr::solve_generalized(inst.omega, cfg).x_hat);
        cfg.q = fgsr::GroupExponent::from_value(0.5);
        cfg.gamma = 4.0;
        e2 += fgsr::relative_error(inst.m_true, fgsr::solve_generalized(inst.omega, cfg).x_hat);
    }
    EXPECT_LE(e2, e1);
}

TEST(FNuclear, SmallRegularizationFitsFullObservation) {
    const auto m = fgsr::random_low_rank(25, 20, 3, 11);
    SolverConfig cfg = with_width(3);
    cfg.gamma = 0.0;
    cfg.rel_tol = 1e-12;
    cfg.max_iters = 5000;
    const auto r = fgsr::solve_f_nuclear(fully_observed(m), cfg);
    EXPECT_LE(fgsr::relative_error(m, r.x_hat), 1e-6);
    EXPECT_EQ(r.revealed_rank, 3u);
    expect_monotone(r.objective_trace);
}

TEST(FNuclear, RankFromSingularValuesNotColumns) {
    const auto inst = fgsr::gen_lrmc_instance(60, 60, 3, 0.3, fgsr::kInfiniteSnr, 14);
    SolverConfig cfg = with_width(3);
    cfg.gamma = 1e-3;
    const auto r = fgsr::solve_f_nuclear(inst.omega, cfg);
    EXPECT_EQ(r.revealed_rank, fgsr::numeric_rank(r.x_hat));
    EXPECT_LE(fgsr::relative_error(inst.m_true, r.x_hat), 1e-2);
}

TEST(Svt, LargeGammaGivesZero) {
    const auto inst = fgsr::gen_lrmc_instance(20, 20, 2, 0.3, fgsr::kInfiniteSnr, 15);
    SolverConfig cfg;
    cfg.gamma = 1e6;
    const auto r = fgsr::solve_svt_nuclear(inst.omega, cfg);
    EXPECT_EQ(r.x_hat, DenseMatrix(20, 20));
    EXPECT_EQ(r.revealed_rank, 0u);
}

TEST(Svt, ZeroGammaFullObservationReturnsData) {
    const auto m = oracle::gaussian(12, 9, 16);
    SolverConfig cfg;
    cfg.gamma = 0.0;
    const auto r = fgsr::solve_svt_nuclear(fully_observed(m), cfg);
    EXPECT_LE(oracle::max_abs_diff(r.x_hat, m), 1e-10);
}

TEST(Svt, NotBetterThanAdmmAtLowMissingRate) {
    const auto inst = fgsr::gen_lrmc_instance(100, 100, 5, 0.3, fgsr::kInfiniteSnr, 17);
    SolverConfig cfg = with_width(10);
    const double admm = fgsr::relative_error(inst.m_true, fgsr::solve_noiseless_admm(inst.omega, cfg).x_hat);
    cfg.gamma = 1.0;
    const double svt = fgsr::relative_error(inst.m_true, fgsr::solve_svt_nuclear(inst.omega, cfg).x_hat);
    EXPECT_GE(2.0 * svt, admm);
}

TEST(Solvers, DInsensitivity) {
    const auto inst = fgsr::gen_lrmc_instance(100, 100, 5, 0.5, fgsr::kInfiniteSnr, 18);
    std::vector<double> errs;
    for (std::size_t d : {5u, 10u, 25u}) {
        const auto r = fgsr::solve_noiseless_admm(inst.omega, with_width(d));
        errs.push_back(fgsr::relative_error(inst.m_true, r.x_hat));
        EXPECT_LE(errs.back(), 1e-2);
    }
    const double lo = *std::min_element(errs.begin(), errs.end());
    const double hi = *std::max_element(errs.begin(), errs.end());
    EXPECT_LE(hi, 10.0 * lo);
}
