#include "fgsr/prox.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fgsr/errors.hpp"
#include "fgsr/kernels.hpp"

namespace fgsr {

namespace {

double shrink_factor(double norm, double lambda) {
    if (norm <= lambda || norm == 0.0) return 0.0;
    return 1.0 - lambda / norm;
}

void require_nonnegative(double lambda, const char* op) {
    if (!(lambda >= 0.0)) throw InputError(std::string(op) + ": threshold must be nonnegative");
}

}  // namespace

DenseMatrix prox_group_l2(const DenseMatrix& x, double lambda) {
    require_nonnegative(lambda, "prox_group_l2");
    const std::vector<double> lambdas(x.cols(), lambda);
    return prox_weighted_group_l2(x, lambdas);
}

DenseMatrix prox_weighted_group_l2(const DenseMatrix& x, std::span<const double> lambdas) {
    if (lambdas.size() != x.cols()) {
        throw DimensionError("prox_weighted_group_l2: " + std::to_string(lambdas.size()) +
                             " thresholds for " + std::to_string(x.cols()) + " columns");
    }
    for (double l : lambdas) require_nonnegative(l, "prox_weighted_group_l2");
    const auto norms = kernels::column_norms(x);
    std::vector<double> factor(x.cols());
    for (std::size_t j = 0; j < x.cols(); ++j) factor[j] = shrink_factor(norms[j], lambdas[j]);

    DenseMatrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto in_row = x.row(i);
        auto out_row = out.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) out_row[j] = factor[j] * in_row[j];
    }
    return out;
}

DenseMatrix prox_weighted_group_l2_rows(const DenseMatrix& x, std::span<const double> lambdas) {
    if (lambdas.size() != x.rows()) {
        throw DimensionError("prox_weighted_group_l2_rows: " + std::to_string(lambdas.size()) +
                             " thresholds for " + std::to_string(x.rows()) + " rows");
    }
    for (double l : lambdas) require_nonnegative(l, "prox_weighted_group_l2_rows");
    const auto norms = kernels::row_norms(x);
    DenseMatrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double f = shrink_factor(norms[i], lambdas[i]);
        const auto in_row = x.row(i);
        auto out_row = out.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) out_row[j] = f * in_row[j];
    }
    return out;
}

DenseMatrix prox_l1(const DenseMatrix& x, double lambda) {
    require_nonnegative(lambda, "prox_l1");
    DenseMatrix out(x.rows(), x.cols());
    kernels::soft_threshold(x.values(), lambda, out.values());
    return out;
}

ReweightState ReweightState::initial(std::size_t d, const ReweightSchedule& schedule) {
    return ReweightState{std::vector<double>(d, 1.0), schedule.epsilon_start};
}

ReweightState reweight_update(const DenseMatrix& a, double q, const ReweightState& state,
                              const ReweightSchedule& schedule) {
    if (!(q > 0.0 && q < 1.0)) throw InputError("reweight_update: q must lie in (0, 1)");
    if (!(state.epsilon >= 0.0)) throw InputError("reweight_update: negative smoothing");
    const auto norms = kernels::column_norms(a);
    ReweightState next;
    next.weights.resize(norms.size());
    for (std::size_t j = 0; j < norms.size(); ++j) {
        const double base = norms[j] + state.epsilon;
        const double w = base > 0.0 ? std::pow(base, q - 1.0) : schedule.weight_cap;
        next.weights[j] = std::clamp(w, schedule.weight_floor, schedule.weight_cap);
    }
    next.epsilon = std::max(state.epsilon * schedule.decay, schedule.epsilon_min);
    return next;
}

}  // namespace fgsr
