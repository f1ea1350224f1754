#pragma once

#include <span>
#include <vector>

#include "fgsr/matrix.hpp"

namespace fgsr {

/// Column-wise group shrinkage: x_j ↦ max(0, 1 − λ/‖x_j‖)·x_j.
DenseMatrix prox_group_l2(const DenseMatrix& x, double lambda);

/// Column-wise group shrinkage with a threshold per column.
DenseMatrix prox_weighted_group_l2(const DenseMatrix& x, std::span<const double> lambdas);

/// Row-wise group shrinkage with a threshold per row (used for α Σ‖b_j‖ on B).
DenseMatrix prox_weighted_group_l2_rows(const DenseMatrix& x, std::span<const double> lambdas);

/// Elementwise soft threshold.
DenseMatrix prox_l1(const DenseMatrix& x, double lambda);

/// Smoothing schedule for the iteratively reweighted group penalty.
struct ReweightSchedule {
    double epsilon_start = 1e-2;
    double decay = 0.9;
    double epsilon_min = 1e-8;
    double weight_floor = 1e-12;
    double weight_cap = 1e12;
};

/// Per-column weights w_j ≈ ‖a_j‖^{q−1} linearizing (1/q)Σ‖a_j‖^q, plus the current smoothing.
struct ReweightState {
    std::vector<double> weights;
    double epsilon = 1e-2;

    static ReweightState initial(std::size_t d, const ReweightSchedule& schedule = {});
};

/// weights[j] = (‖a_j‖ + ε)^{q−1} clamped to [floor, cap]; ε then decays toward epsilon_min.
ReweightState reweight_update(const DenseMatrix& a, double q, const ReweightState& state,
                              const ReweightSchedule& schedule = {});

}  // namespace fgsr
