#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fgsr/matrix.hpp"
#include "fgsr/observations.hpp"
#include "fgsr/prox.hpp"
#include "fgsr/regularizers.hpp"

namespace fgsr {

/// Hyperparameters shared by the completion and RPCA solvers.
///
/// Solvers rescale the data to unit RMS before iterating, so alpha, beta,
/// gamma, lambda and mu are all expressed relative to RMS-normalized data.
struct SolverConfig {
    std::size_t d = 0;  ///< initial factor width; 0 selects default_rank_heuristic
    double alpha = 1.0;
    double beta = 1.0;   ///< data weight of the noisy FGSR model
    double gamma = 1.0;  ///< regularization weight (generalized model, F-nuclear, SVT)
    std::optional<double> lambda;  ///< RPCA ℓ1 weight; default 1/√max(m, n)
    GroupExponent q{};
    BPenalty b_penalty = BPenalty::HalfFrobeniusSq;

    /// Initial ADMM penalty. Unset: mu_auto_factor / median_j ‖P_Ω(M) b_j‖ at the initial B.
    std::optional<double> mu;
    double mu_auto_factor = 2.0;
    double mu_growth = 1.005;
    double mu_max_ratio = 1e6;

    double rel_tol = 1e-5;
    std::size_t max_iters = 1000;
    double prune_tol = 1e-8;  ///< relative to the largest column norm of A
    std::uint64_t seed = 0;

    ReweightSchedule reweight{};
    double step_safety = 1e-6;
    double backtrack_factor = 1.1;
    double divergence_limit = 1e12;

    void validate() const;
};

struct RecoveryResult {
    DenseMatrix x_hat;
    FactorPair factors;
    std::size_t revealed_rank = 0;
    std::size_t iterations = 0;
    std::vector<double> objective_trace;
    /// Relative change of the recovered matrix; the noiseless ADMM also folds in
    /// the residual of AB on Ω, since x_hat itself never moves there.
    std::vector<double> rel_change_trace;
    std::vector<std::size_t> rank_trace;  ///< active columns after each iteration
    bool converged = false;
    double data_scale = 1.0;  ///< RMS of the observations used for normalization
};

/// max(1, ⌊|Ω|/(m+n)⌋).
std::size_t default_rank_heuristic(const ObservationSet& omega);

/// min ‖A‖_{2,1} + (α/2)‖B‖_F² s.t. X = AB, P_Ω(X) = P_Ω(M), by linearized ADMM.
/// Observed entries of x_hat are copied from omega bit for bit.
RecoveryResult solve_noiseless_admm(const ObservationSet& omega, const SolverConfig& config);

/// min ‖A‖_{2,1} + (α/2)‖B‖_F² + (β/2)‖P_Ω(M_e − AB)‖_F² by PALM.
RecoveryResult solve_noisy_palm(const ObservationSet& omega, const SolverConfig& config);

/// min ½‖P_Ω(M_e − AB)‖_F² + γ((1/q)‖A‖_{2,q}^q + (α/2)‖B‖_F²) by PALM with
/// iterative reweighting of the group penalty when q < 1.
RecoveryResult solve_generalized(const ObservationSet& omega, const SolverConfig& config);

/// Baseline: min ½‖P_Ω(M_e − AB)‖_F² + (γ/2)(‖A‖_F² + ‖B‖_F²) by PALM.
RecoveryResult solve_f_nuclear(const ObservationSet& omega, const SolverConfig& config);

/// Baseline: min ½‖P_Ω(M_e − X)‖_F² + γ‖X‖_* by proximal gradient with singular value
/// soft thresholding.
RecoveryResult solve_svt_nuclear(const ObservationSet& omega, const SolverConfig& config);

}  // namespace fgsr
