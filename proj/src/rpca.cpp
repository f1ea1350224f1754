#include "fgsr/rpca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fgsr/errors.hpp"
#include "fgsr/kernels.hpp"
#include "fgsr/prox.hpp"
#include "solver_common.hpp"

namespace fgsr {

namespace {

using detail::WorkingFactors;

enum class RpcaKind { Fgsr, FNuclear };

constexpr double kResidualWeight = 10.0;

RpcaResult run_rpca(const DenseMatrix& m_e, const SolverConfig& config, RpcaKind kind,
                    const char* name) {
    config.validate();
    if (m_e.empty()) throw InputError(std::string(name) + ": empty input matrix");
    if (!m_e.all_finite()) throw InputError(std::string(name) + ": input has non-finite entries");

    const std::size_t m = m_e.rows();
    const std::size_t n = m_e.cols();
    const bool fgsr = kind == RpcaKind::Fgsr;
    const double q = config.q.value();
    const bool reweighted = fgsr && q < 1.0;

    const double rms = std::sqrt(frobenius_norm_sq(m_e) / static_cast<double>(m_e.size()));
    const double scale = rms > 0.0 ? rms : 1.0;
    const DenseMatrix y = m_e * (1.0 / scale);
    const double lambda = config.lambda.value_or(1.0 / std::sqrt(static_cast<double>(std::max(m, n))));
    const std::size_t d = config.d > 0 ? config.d : std::max<std::size_t>(1, std::min(m, n) / 2);

    WorkingFactors f = detail::random_factors(m, n, d, config.seed);
    ReweightState rw = ReweightState::initial(d, config.reweight);

    double mu = 1.0;
    if (config.mu) {
        mu = *config.mu;
    } else {
        const double med = detail::median(kernels::column_norms(multiply_a_bt(y, f.b)));
        mu = med > 0.0 ? config.mu_auto_factor / med : 1.0;
    }
    const double mu_cap = mu * config.mu_max_ratio;

    const double y_norm = frobenius_norm(y) > 0.0 ? frobenius_norm(y) : 1.0;
    DenseMatrix e(m, n);
    DenseMatrix dual(m, n);
    DenseMatrix x = multiply(f.a, f.b);

    RpcaResult result;
    double primal = 0.0;
    for (std::size_t it = 0; it < config.max_iters; ++it) {
        DenseMatrix t = y - e + dual * (1.0 / mu);
        const DenseMatrix x_prev = x;

        if (f.width() > 0) {
            if (fgsr) {
                const double la = mu * detail::spectral_sq(f.b) + config.step_safety;
                const DenseMatrix grad = multiply_a_bt(t - x, f.b);
                std::vector<double> w(f.width(), 1.0);
                if (reweighted) {
                    rw = reweight_update(f.a, q, rw, config.reweight);
                    w = rw.weights;
                }
                for (double& v : w) v /= la;
                f.a = prox_weighted_group_l2(f.a + grad * (mu / la), w);
                f.prune(config.prune_tol, false);
            } else {
                // Aᵀ = (μBBᵀ + γI)⁻¹ μ B Tᵀ
                const DenseMatrix gram = multiply_a_bt(f.b, f.b);
                f.a = detail::solve_shifted_spd(gram * mu, config.gamma,
                                                multiply_a_bt(f.b, t) * mu)
                          .transpose();
            }
        }

        if (f.width() > 0) {
            const DenseMatrix gram = multiply_at_b(f.a, f.a);
            const DenseMatrix at = multiply_at_b(f.a, t);
            if (!fgsr || config.b_penalty == BPenalty::HalfFrobeniusSq) {
                const double ridge = fgsr ? config.alpha : config.gamma;
                f.b = detail::solve_shifted_spd(gram * mu, ridge, at * mu);
            } else {
                const double lb = mu * detail::spectral_sq(f.a) + config.step_safety;
                DenseMatrix v = f.b + (at - multiply(gram, f.b)) * (mu / lb);
                const std::vector<double> th(f.width(), config.alpha / lb);
                f.b = prox_weighted_group_l2_rows(v, th);
            }
            x = multiply(f.a, f.b);
        } else {
            f.b = DenseMatrix(0, n);
            x = DenseMatrix(m, n);
        }

        DenseMatrix v = y - x + dual * (1.0 / mu);
        kernels::soft_threshold(v.values(), lambda / mu, e.values());
        DenseMatrix r = y - x - e;
        dual += r * mu;
        mu = std::min(mu * config.mu_growth, mu_cap);
        primal = frobenius_norm(r);

        const double prev_sq = frobenius_norm_sq(x_prev);
        const double diff_sq = frobenius_norm_sq(x - x_prev);
        const double change = prev_sq > 0.0 ? std::sqrt(diff_sq / prev_sq)
                              : diff_sq > 0.0 ? std::numeric_limits<double>::infinity()
                                              : 0.0;
        // Stopping also needs M_e = AB + E to hold to a tenth of the tolerance.
        const double rc = std::max(change, kResidualWeight * primal / y_norm);
        double l1 = 0.0;
        for (double v_e : e.values()) l1 += std::abs(v_e);
        const double low_rank_penalty =
            fgsr ? detail::a_penalty(f.a, q, rw.epsilon) +
                       detail::b_penalty(f.b, config.b_penalty, config.alpha)
                 : 0.5 * config.gamma * (frobenius_norm_sq(f.a) + frobenius_norm_sq(f.b));
        const double objective = low_rank_penalty + lambda * l1;

        result.objective_trace.push_back(objective);
        result.rel_change_trace.push_back(rc);
        result.rank_trace.push_back(f.width());
        result.iterations = it + 1;
        detail::check_divergence(objective, config.divergence_limit, result.objective_trace, name,
                                 "objective");
        detail::check_divergence(primal, config.divergence_limit, result.objective_trace, name,
                                 "primal residual");
        if (rc < config.rel_tol) {
            result.converged = true;
            break;
        }
    }

    result.factors = f.expand(scale);
    result.revealed_rank =
        fgsr ? result.factors.active_count() : numeric_rank(detail::product_singular_values(f.a, f.b));
    result.low_rank = x * scale;
    result.sparse = e * scale;
    result.primal_residual = primal * scale;
    result.data_scale = scale;
    return result;
}

}  // namespace

RpcaResult solve_rpca(const DenseMatrix& m_e, const SolverConfig& config) {
    return run_rpca(m_e, config, RpcaKind::Fgsr, "solve_rpca");
}

RpcaResult solve_rpca_f_nuclear(const DenseMatrix& m_e, const SolverConfig& config) {
    return run_rpca(m_e, config, RpcaKind::FNuclear, "solve_rpca_f_nuclear");
}

}  // namespace fgsr
