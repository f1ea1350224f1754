#include "fgsr/lrmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fgsr/errors.hpp"
#include "fgsr/kernels.hpp"
#include "solver_common.hpp"

namespace fgsr {

void SolverConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw InputError(std::string("SolverConfig: ") + name + " must be positive");
    };
    positive(alpha, "alpha");
    positive(beta, "beta");
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw InputError("SolverConfig: gamma must be nonnegative");
    if (lambda) positive(*lambda, "lambda");
    if (mu) positive(*mu, "mu");
    positive(mu_auto_factor, "mu_auto_factor");
    if (!(mu_growth >= 1.0)) throw InputError("SolverConfig: mu_growth must be at least 1");
    if (!(mu_max_ratio >= 1.0)) throw InputError("SolverConfig: mu_max_ratio must be at least 1");
    positive(rel_tol, "rel_tol");
    if (max_iters < 1) throw InputError("SolverConfig: max_iters must be at least 1");
    if (!(prune_tol >= 0.0)) throw InputError("SolverConfig: prune_tol must be nonnegative");
    positive(step_safety, "step_safety");
    if (!(backtrack_factor > 1.0))
        throw InputError("SolverConfig: backtrack_factor must exceed 1");
    positive(divergence_limit, "divergence_limit");
}

std::size_t default_rank_heuristic(const ObservationSet& omega) {
    const std::size_t denom = omega.rows() + omega.cols();
    if (denom == 0) return 1;
    return std::max<std::size_t>(1, omega.size() / denom);
}

namespace {

using detail::WorkingFactors;

/// Observations rescaled to unit RMS.
struct Problem {
    std::size_t rows = 0;
    std::size_t cols = 0;
    kernels::SamplingPattern pattern;
    std::vector<double> y;
    double scale = 1.0;
};

Problem normalize(const ObservationSet& omega, const SolverConfig& config, const char* solver) {
    config.validate();
    if (omega.empty()) throw InputError(std::string(solver) + ": empty observation set");
    Problem p;
    p.rows = omega.rows();
    p.cols = omega.cols();
    p.pattern = omega.pattern();
    p.y = omega.values();
    const double rms = std::sqrt(detail::norm_sq(p.y) / static_cast<double>(p.y.size()));
    p.scale = rms > 0.0 ? rms : 1.0;
    for (double& v : p.y) v /= p.scale;
    return p;
}

double relative_change(double diff_sq, double prev_sq) {
    if (prev_sq <= 0.0) return diff_sq <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(std::max(0.0, diff_sq) / prev_sq);
}

std::vector<double> uniform_weights(std::size_t d) { return std::vector<double>(d, 1.0); }

std::vector<double> scaled(std::vector<double> v, double f) {
    for (double& x : v) x *= f;
    return v;
}

DenseMatrix rescaled_product(const WorkingFactors& f, std::size_t m, std::size_t n, double scale) {
    if (f.width() == 0) return DenseMatrix(m, n);
    DenseMatrix x = multiply(f.a, f.b);
    x *= scale;
    return x;
}

void finish_factors(RecoveryResult& result, const WorkingFactors& f, const Problem& p) {
    result.factors = f.expand(p.scale);
    result.revealed_rank = result.factors.active_count();
    result.x_hat = rescaled_product(f, p.rows, p.cols, p.scale);
    result.data_scale = p.scale;
}

// --- noiseless ADMM ---------------------------------------------------------

}  // namespace

RecoveryResult solve_noiseless_admm(const ObservationSet& omega, const SolverConfig& config) {
    constexpr const char* kName = "solve_noiseless_admm";
    const Problem p = normalize(omega, config, kName);
    const std::size_t d = detail::resolve_width(config, omega);
    const double q = config.q.value();
    const std::size_t nnz = p.pattern.nnz();

    WorkingFactors f = detail::random_factors(p.rows, p.cols, d, config.seed);
    ReweightState rw = ReweightState::initial(d, config.reweight);

    double mu = 1.0;
    if (config.mu) {
        mu = *config.mu;
    } else {
        DenseMatrix yb(p.rows, d);
        kernels::sparse_times_bt(p.pattern, p.y, f.b, yb);
        const double med = detail::median(kernels::column_norms(yb));
        mu = med > 0.0 ? config.mu_auto_factor / med : 1.0;
    }
    const double mu_cap = mu * config.mu_max_ratio;

    std::vector<double> dual(nnz, 0.0);
    std::vector<double> ab_omega = detail::sampled_product(f.a, f.b, p.pattern);
    const double y_sq = detail::norm_sq(p.y);
    double x_sq = y_sq + detail::product_norm_sq(f.a, f.b) - detail::norm_sq(ab_omega);

    RecoveryResult result;
    std::vector<double> s(nnz);
    for (std::size_t it = 0; it < config.max_iters; ++it) {
        for (std::size_t e = 0; e < nnz; ++e) s[e] = p.y[e] + dual[e] / mu - ab_omega[e];
        const DenseMatrix a_prev = f.a;
        const DenseMatrix b_prev = f.b;
        const std::vector<double> ab_prev_omega = ab_omega;

        double eps = 0.0;
        if (f.width() > 0) {
            // A-step: the augmented term only differs from AB on Ω, so its
            // gradient in A is -μ·S·Bᵀ with S sparse.
            DenseMatrix sb(p.rows, f.width());
            kernels::sparse_times_bt(p.pattern, s, f.b, sb);
            const double la = mu * detail::spectral_sq(f.b) + config.step_safety;
            std::vector<double> w = uniform_weights(f.width());
            if (q < 1.0) {
                eps = rw.epsilon;
                rw = reweight_update(f.a, q, rw, config.reweight);
                w = rw.weights;
            }
            DenseMatrix v = f.a;
            const double step = mu / la;
            for (std::size_t e = 0; e < v.size(); ++e) v.values()[e] += step * sb.values()[e];
            f.a = prox_weighted_group_l2(v, scaled(std::move(w), 1.0 / la));
            f.prune(config.prune_tol, false);
        }

        if (f.width() > 0) {
            // B-step against T = A_prev·B_prev + S.
            DenseMatrix rhs = multiply(multiply_at_b(f.a, a_prev), b_prev);
            DenseMatrix as(f.width(), p.cols);
            kernels::at_times_sparse(f.a, p.pattern, s, as);
            rhs += as;
            const DenseMatrix gram = multiply_at_b(f.a, f.a);
            if (config.b_penalty == BPenalty::HalfFrobeniusSq) {
                f.b = detail::solve_shifted_spd(gram * mu, config.alpha, rhs * mu);
            } else {
                const double lb = mu * detail::spectral_sq(f.a) + config.step_safety;
                DenseMatrix v = f.b + (rhs - multiply(gram, f.b)) * (mu / lb);
                const std::vector<double> t(f.width(), config.alpha / lb);
                f.b = prox_weighted_group_l2_rows(v, t);
            }
        } else {
            f.b = DenseMatrix(0, p.cols);
        }

        ab_omega = detail::sampled_product(f.a, f.b, p.pattern);
        double primal_sq = 0.0;
        double omega_diff_sq = 0.0;
        for (std::size_t e = 0; e < nnz; ++e) {
            const double r = p.y[e] - ab_omega[e];
            dual[e] += mu * r;
            primal_sq += r * r;
            const double dd = ab_omega[e] - ab_prev_omega[e];
            omega_diff_sq += dd * dd;
        }
        mu = std::min(mu * config.mu_growth, mu_cap);

        // X alone is frozen on Ω, so the constraint residual there counts too;
        // otherwise a fully observed problem would stop at once.
        const double diff_sq = detail::product_diff_sq(a_prev, b_prev, f.a, f.b) - omega_diff_sq;
        const double rc = relative_change(std::max(diff_sq, primal_sq), x_sq);
        x_sq = y_sq + detail::product_norm_sq(f.a, f.b) - detail::norm_sq(ab_omega);

        const double objective = detail::a_penalty(f.a, q, q < 1.0 ? rw.epsilon : eps) +
                                 detail::b_penalty(f.b, config.b_penalty, config.alpha);
        result.objective_trace.push_back(objective);
        result.rel_change_trace.push_back(rc);
        result.rank_trace.push_back(f.width());
        result.iterations = it + 1;
        detail::check_divergence(objective, config.divergence_limit, result.objective_trace, kName,
                                 "objective");
        detail::check_divergence(std::sqrt(primal_sq), config.divergence_limit,
                                 result.objective_trace, kName, "primal residual");
        if (rc < config.rel_tol) {
            result.converged = true;
            break;
        }
    }

    finish_factors(result, f, p);
    for (const auto& e : omega.entries()) result.x_hat(e.row, e.col) = e.value;
    return result;
}

// --- PALM family -----------------------------------------------------------

namespace {

enum class PalmKind { Fgsr, FNuclear };

struct PalmModel {
    PalmKind kind = PalmKind::Fgsr;
    double gamma = 1.0;
    double alpha = 1.0;
    double q = 1.0;
    BPenalty b_penalty = BPenalty::HalfFrobeniusSq;
};

double palm_objective(const std::vector<double>& r, const DenseMatrix& a, const DenseMatrix& b,
                      const PalmModel& model, double eps) {
    const double fit = 0.5 * detail::norm_sq(r);
    if (model.kind == PalmKind::FNuclear)
        return fit + 0.5 * model.gamma * (frobenius_norm_sq(a) + frobenius_norm_sq(b));
    return fit + model.gamma * (detail::a_penalty(a, model.q, eps) +
                                detail::b_penalty(b, model.b_penalty, model.alpha));
}

std::vector<double> residual(const DenseMatrix& a, const DenseMatrix& b, const Problem& p) {
    std::vector<double> r = detail::sampled_product(a, b, p.pattern);
    for (std::size_t e = 0; e < r.size(); ++e) r[e] -= p.y[e];
    return r;
}

bool accept(double candidate, double current) {
    return candidate <= current + 1e-12 * std::max(1.0, std::abs(current));
}

RecoveryResult run_palm(const ObservationSet& omega, const SolverConfig& config,
                        const PalmModel& model, const char* name) {
    const Problem p = normalize(omega, config, name);
    const std::size_t d = detail::resolve_width(config, omega);
    const bool fgsr = model.kind == PalmKind::Fgsr;
    const bool reweighted = fgsr && model.q < 1.0;

    WorkingFactors f = detail::random_factors(p.rows, p.cols, d, config.seed);
    ReweightState rw = ReweightState::initial(d, config.reweight);
    double eps = reweighted ? rw.epsilon : 0.0;

    std::vector<double> r = residual(f.a, f.b, p);
    double objective = palm_objective(r, f.a, f.b, model, eps);

    RecoveryResult result;
    constexpr int kMaxBacktracks = 60;
    for (std::size_t it = 0; it < config.max_iters; ++it) {
        const DenseMatrix a_prev = f.a;
        const DenseMatrix b_prev = f.b;

        // A-step: prox-linear on the data term.
        if (f.width() > 0) {
            DenseMatrix grad(p.rows, f.width());
            kernels::sparse_times_bt(p.pattern, r, f.b, grad);
            std::vector<double> w = uniform_weights(f.width());
            double next_eps = eps;
            if (reweighted) {
                rw.epsilon = eps;
                rw = reweight_update(f.a, model.q, rw, config.reweight);
                w = rw.weights;
                next_eps = rw.epsilon;
            }
            double la = detail::spectral_sq(f.b) + config.step_safety;
            for (int bt = 0;; ++bt) {
                DenseMatrix cand;
                if (fgsr) {
                    cand = prox_weighted_group_l2(f.a - grad * (1.0 / la),
                                                  scaled(w, model.gamma / la));
                } else {
                    cand = f.a - (grad + f.a * model.gamma) * (1.0 / (la + model.gamma));
                }
                std::vector<double> cand_r = residual(cand, f.b, p);
                const double cand_obj = palm_objective(cand_r, cand, f.b, model, eps);
                if (accept(cand_obj, objective) || bt == kMaxBacktracks) {
                    f.a = std::move(cand);
                    r = std::move(cand_r);
                    objective = cand_obj;
                    break;
                }
                la *= config.backtrack_factor;
            }
            eps = next_eps;
            if (fgsr && f.prune(config.prune_tol, false) > 0) r = residual(f.a, f.b, p);
            objective = palm_objective(r, f.a, f.b, model, eps);
        }

        // B-step: gradient step on the smooth part (row prox for the group B penalty).
        if (f.width() > 0) {
            DenseMatrix grad(f.width(), p.cols);
            kernels::at_times_sparse(f.a, p.pattern, r, grad);
            double lb = detail::spectral_sq(f.a) + config.step_safety;
            for (int bt = 0;; ++bt) {
                DenseMatrix cand;
                if (!fgsr) {
                    cand = f.b - (grad + f.b * model.gamma) * (1.0 / (lb + model.gamma));
                } else if (model.b_penalty == BPenalty::HalfFrobeniusSq) {
                    const double ridge = model.gamma * model.alpha;
                    cand = f.b - (grad + f.b * ridge) * (1.0 / (lb + ridge));
                } else {
                    const std::vector<double> t(f.width(), model.gamma * model.alpha / lb);
                    cand = prox_weighted_group_l2_rows(f.b - grad * (1.0 / lb), t);
                }
                std::vector<double> cand_r = residual(f.a, cand, p);
                const double cand_obj = palm_objective(cand_r, f.a, cand, model, eps);
                if (accept(cand_obj, objective) || bt == kMaxBacktracks) {
                    f.b = std::move(cand);
                    r = std::move(cand_r);
                    objective = cand_obj;
                    break;
                }
                lb *= config.backtrack_factor;
            }
        } else {
            f.b = DenseMatrix(0, p.cols);
            r = residual(f.a, f.b, p);
            objective = palm_objective(r, f.a, f.b, model, eps);
        }

        const double rc = relative_change(detail::product_diff_sq(a_prev, b_prev, f.a, f.b),
                                          detail::product_norm_sq(a_prev, b_prev));
        result.objective_trace.push_back(objective);
        result.rel_change_trace.push_back(rc);
        result.rank_trace.push_back(f.width());
        result.iterations = it + 1;
        detail::check_divergence(objective, config.divergence_limit, result.objective_trace, name,
                                 "objective");
        if (rc < config.rel_tol) {
            result.converged = true;
            break;
        }
    }

    finish_factors(result, f, p);
    if (!fgsr) {
        result.factors = FactorPair::with_mask(result.factors.a, result.factors.b, 0.0);
        result.revealed_rank = numeric_rank(detail::product_singular_values(f.a, f.b));
    }
    return result;
}

}  // namespace

RecoveryResult solve_noisy_palm(const ObservationSet& omega, const SolverConfig& config) {
    // β/2‖·‖² + R is β times ½‖·‖² + R/β, so this is the generalized
    // iteration at q = 1 with γ = 1/β and the objective rescaled.
    PalmModel model;
    model.gamma = 1.0 / config.beta;
    model.alpha = config.alpha;
    model.b_penalty = config.b_penalty;
    RecoveryResult result = run_palm(omega, config, model, "solve_noisy_palm");
    for (double& v : result.objective_trace) v *= config.beta;
    return result;
}

RecoveryResult solve_generalized(const ObservationSet& omega, const SolverConfig& config) {
    PalmModel model;
    model.gamma = config.gamma;
    model.alpha = config.alpha;
    model.q = config.q.value();
    model.b_penalty = config.b_penalty;
    return run_palm(omega, config, model, "solve_generalized");
}

RecoveryResult solve_f_nuclear(const ObservationSet& omega, const SolverConfig& config) {
    PalmModel model;
    model.kind = PalmKind::FNuclear;
    model.gamma = config.gamma;
    return run_palm(omega, config, model, "solve_f_nuclear");
}

RecoveryResult solve_svt_nuclear(const ObservationSet& omega, const SolverConfig& config) {
    constexpr const char* kName = "solve_svt_nuclear";
    const Problem p = normalize(omega, config, kName);
    DenseMatrix x(p.rows, p.cols);
    ThinSvd last{DenseMatrix(p.rows, 0), {}, DenseMatrix(0, p.cols)};

    RecoveryResult result;
    for (std::size_t it = 0; it < config.max_iters; ++it) {
        // Gradient step of length 1 replaces the observed entries with the data.
        DenseMatrix g = x;
        for (std::size_t e = 0; e < p.pattern.nnz(); ++e)
            g(p.pattern.row_index[e], p.pattern.col_index[e]) = p.y[e];
        ThinSvd svd = thin_svd(g);
        for (double& sv : svd.s) sv = std::max(0.0, sv - config.gamma);
        DenseMatrix next(p.rows, p.cols);
        const std::size_t k = numeric_rank(svd.s, 0.0);
        for (std::size_t i = 0; i < p.rows; ++i) {
            auto out = next.row(i);
            for (std::size_t t = 0; t < k; ++t) {
                const double c = svd.u(i, t) * svd.s[t];
                if (c == 0.0) continue;
                const auto vrow = svd.vt.row(t);
                for (std::size_t j = 0; j < p.cols; ++j) out[j] += c * vrow[j];
            }
        }
        const double rc = relative_change(frobenius_norm_sq(next - x), frobenius_norm_sq(x));
        x = std::move(next);
        last = std::move(svd);

        double fit = 0.0;
        for (std::size_t e = 0; e < p.pattern.nnz(); ++e) {
            const double r = x(p.pattern.row_index[e], p.pattern.col_index[e]) - p.y[e];
            fit += r * r;
        }
        double nuclear = 0.0;
        for (double sv : last.s) nuclear += sv;
        const double objective = 0.5 * fit + config.gamma * nuclear;
        result.objective_trace.push_back(objective);
        result.rel_change_trace.push_back(rc);
        result.rank_trace.push_back(k);
        result.iterations = it + 1;
        detail::check_divergence(objective, config.divergence_limit, result.objective_trace, kName,
                                 "objective");
        if (rc < config.rel_tol) {
            result.converged = true;
            break;
        }
    }

    const std::size_t k = numeric_rank(last.s, 0.0);
    DenseMatrix a(p.rows, k);
    DenseMatrix b(k, p.cols);
    for (std::size_t t = 0; t < k; ++t) {
        const double root = std::sqrt(last.s[t] * p.scale);
        for (std::size_t i = 0; i < p.rows; ++i) a(i, t) = root * last.u(i, t);
        for (std::size_t j = 0; j < p.cols; ++j) b(t, j) = root * last.vt(t, j);
    }
    result.factors = FactorPair::with_mask(std::move(a), std::move(b), 0.0);
    result.revealed_rank = numeric_rank(last.s);
    x *= p.scale;
    result.x_hat = std::move(x);
    result.data_scale = p.scale;
    return result;
}

}  // namespace fgsr
