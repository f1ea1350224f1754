#pragma once

#include <cstddef>
#include <vector>

#include "fgsr/lrmc.hpp"
#include "fgsr/matrix.hpp"
#include "fgsr/regularizers.hpp"

namespace fgsr {

struct RpcaResult {
    DenseMatrix low_rank;
    DenseMatrix sparse;
    FactorPair factors;
    std::size_t revealed_rank = 0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;
    /// max(relative change of AB, 10·‖M_e − AB − E‖_F/‖M_e‖_F) per iteration.
    std::vector<double> rel_change_trace;
    std::vector<std::size_t> rank_trace;
    /// ‖M_e − low_rank − sparse‖_F after the last iteration.
    double primal_residual = 0.0;
    double data_scale = 1.0;
};

/// (1/q)‖A‖_{2,q}^q + (α/2)‖B‖_F² + λ‖E‖₁ s.t. M_e = AB + E, by linearized ADMM.
/// lambda defaults to 1/√max(m, n) (relative to RMS-normalized M_e).
RpcaResult solve_rpca(const DenseMatrix& m_e, const SolverConfig& config);

/// Baseline: (γ/2)(‖A‖_F² + ‖B‖_F²) + λ‖E‖₁ s.t. M_e = AB + E, alternating ridge steps.
RpcaResult solve_rpca_f_nuclear(const DenseMatrix& m_e, const SolverConfig& config);

}  // namespace fgsr
