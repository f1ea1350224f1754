#include "fgsr/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "fgsr/matrix.hpp"
#include "fgsr/prox.hpp"
#include "fgsr/random.hpp"

namespace fgsr {

namespace {

struct Instance {
    DenseMatrix x;
    std::vector<double> sigma;  ///< nonzero singular values, descending
    std::size_t rank = 0;
};

std::size_t draw(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(hi - lo + 1));
}

Instance random_instance(Rng& rng, const VerifyOptions& opt, bool perturb) {
    Instance inst;
    const std::size_t m = draw(rng, 2, opt.max_rows);
    const std::size_t n = draw(rng, 2, opt.max_cols);
    const std::size_t r = draw(rng, 1, std::min({opt.max_rank, m, n}));
    inst.x = random_low_rank(m, n, r, rng());
    const ThinSvd svd = thin_svd(inst.x);
    inst.rank = numeric_rank(svd.s);
    inst.sigma.assign(svd.s.begin(), svd.s.begin() + static_cast<std::ptrdiff_t>(inst.rank));
    if (perturb && !inst.sigma.empty()) inst.sigma[0] *= 1.001;
    return inst;
}

double power_sum(const std::vector<double>& sigma, double p) {
    double acc = 0.0;
    for (double s : sigma) acc += std::pow(s, p);
    return acc;
}

double rel_gap(double value, double reference) {
    return std::abs(value - reference) / std::max(std::abs(reference), 1e-300);
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(3);
    ss << std::scientific << v;
    return ss.str();
}

PropertyOutcome finish(std::string name, std::size_t checks, double worst, double tol,
                       const std::string& what) {
    PropertyOutcome o;
    o.name = std::move(name);
    o.checks = checks;
    o.worst = worst;
    o.passed = worst <= tol;
    o.detail = what + " worst " + fmt(worst) + " (tol " + fmt(tol) + ")";
    return o;
}

PropertyOutcome half_identity(const VerifyOptions& opt, Rng& rng) {
    double worst = 0.0;
    const FgsrSpec spec{GroupExponent{}, 1.0, BPenalty::GroupL2};
    for (std::size_t c = 0; c < opt.cases; ++c) {
        const Instance inst = random_instance(rng, opt, opt.perturb);
        const double value = factored_objective(optimal_factors(inst.x, spec, inst.rank), spec);
        worst = std::max(worst, rel_gap(value, 2.0 * power_sum(inst.sigma, 0.5)));
    }
    return finish("identity_half", opt.cases, worst, opt.identity_tol,
                  "||A||_{2,1}+||B^T||_{2,1} at optimal factors vs 2*sum(s^(1/2)):");
}

PropertyOutcome two_thirds_identity(const VerifyOptions& opt, Rng& rng) {
    double worst = 0.0;
    std::size_t checks = 0;
    for (std::size_t c = 0; c < opt.cases; ++c) {
        const Instance inst = random_instance(rng, opt, opt.perturb);
        for (double alpha : {0.5, 1.0, 2.0}) {
            const FgsrSpec spec{GroupExponent{}, alpha, BPenalty::HalfFrobeniusSq};
            const double value =
                factored_objective(optimal_factors(inst.x, spec, inst.rank), spec);
            const double closed = 1.5 * std::cbrt(alpha) * power_sum(inst.sigma, 2.0 / 3.0);
            worst = std::max(worst, rel_gap(value, closed));
            ++checks;
        }
    }
    return finish("identity_two_thirds", checks, worst, opt.identity_tol,
                  "||A||_{2,1}+(a/2)||B||_F^2 vs (3a^(1/3)/2)*sum(s^(2/3)):");
}

double closed_form(const std::vector<double>& sigma, double q, double alpha, BPenalty pen) {
    if (pen == BPenalty::GroupL2)
        return (1.0 + 1.0 / q) * std::pow(alpha, q / (q + 1.0)) * power_sum(sigma, q / (q + 1.0));
    return (0.5 + 1.0 / q) * std::pow(alpha, q / (q + 2.0)) *
           power_sum(sigma, 2.0 * q / (2.0 + q));
}

std::vector<GroupExponent> exponents(const VerifyOptions& opt) {
    if (opt.q) return {*opt.q};
    return {GroupExponent::from_halvings(0), GroupExponent::from_halvings(1),
            GroupExponent::from_halvings(2)};
}

PropertyOutcome general_identity(const VerifyOptions& opt, Rng& rng) {
    double worst = 0.0;
    std::size_t checks = 0;
    const auto qs = exponents(opt);
    for (std::size_t c = 0; c < opt.cases; ++c) {
        const Instance inst = random_instance(rng, opt, opt.perturb);
        for (GroupExponent q : qs) {
            for (BPenalty pen : {BPenalty::GroupL2, BPenalty::HalfFrobeniusSq}) {
                for (double alpha : {0.5, 1.0, 2.0}) {
                    const FgsrSpec spec{q, alpha, pen};
                    const double value =
                        factored_objective(optimal_factors(inst.x, spec, inst.rank), spec);
                    worst = std::max(worst,
                                     rel_gap(value, closed_form(inst.sigma, q.value(), alpha, pen)));
                    ++checks;
                }
            }
            if (q.halvings() == 2) {
                // 4.5·α^{1/9}·Σσ^{2/9} at q = 1/4 with the squared B penalty.
                const FgsrSpec spec{q, 1.7, BPenalty::HalfFrobeniusSq};
                const double value =
                    factored_objective(optimal_factors(inst.x, spec, inst.rank), spec);
                const double closed = 4.5 * std::pow(1.7, 1.0 / 9.0) * power_sum(inst.sigma, 2.0 / 9.0);
                worst = std::max(worst, rel_gap(value, closed));
                ++checks;
            }
        }
    }
    std::string label = "general q identity";
    if (opt.q) label += " at q=" + opt.q->to_string();
    return finish("identity_general_q", checks, worst, opt.identity_tol, label + ":");
}

DenseMatrix random_matrix(Rng& rng, std::size_t m, std::size_t n, double scale = 1.0) {
    DenseMatrix x(m, n);
    fill_standard_normal(rng, x.values(), scale);
    return x;
}

/// Another factorization of the same product: A·G, G⁻¹·B with G = I + small noise
/// (inverted by Gauss-Jordan), or a column of A split into two columns.
FactorPair perturbed_factorization(const FactorPair& f, Rng& rng, bool split) {
    const std::size_t d = f.width();
    if (split) {
        const std::size_t j = std::min(d - 1, static_cast<std::size_t>(uniform01(rng) * double(d)));
        const double t = uniform01(rng);
        DenseMatrix a(f.a.rows(), d + 1);
        DenseMatrix b(d + 1, f.b.cols());
        for (std::size_t i = 0; i < f.a.rows(); ++i) {
            for (std::size_t k = 0; k < d; ++k) a(i, k) = f.a(i, k);
            a(i, j) = t * f.a(i, j);
            a(i, d) = (1.0 - t) * f.a(i, j);
        }
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t c = 0; c < f.b.cols(); ++c) b(k, c) = f.b(k, c);
        for (std::size_t c = 0; c < f.b.cols(); ++c) b(d, c) = f.b(j, c);
        return FactorPair::with_mask(std::move(a), std::move(b));
    }
    const double spread = 0.05 + 0.5 * uniform01(rng);
    DenseMatrix g = DenseMatrix::identity(d) + random_matrix(rng, d, d, spread);
    // Gauss-Jordan with partial pivoting on [G | I].
    DenseMatrix inv = DenseMatrix::identity(d);
    DenseMatrix work = g;
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < d; ++r)
            if (std::abs(work(r, col)) > std::abs(work(piv, col))) piv = r;
        if (std::abs(work(piv, col)) < 1e-8) return f;
        for (std::size_t c = 0; c < d; ++c) {
            std::swap(work(col, c), work(piv, c));
            std::swap(inv(col, c), inv(piv, c));
        }
        const double p = work(col, col);
        for (std::size_t c = 0; c < d; ++c) {
            work(col, c) /= p;
            inv(col, c) /= p;
        }
        for (std::size_t r = 0; r < d; ++r) {
            if (r == col) continue;
            const double factor = work(r, col);
            for (std::size_t c = 0; c < d; ++c) {
                work(r, c) -= factor * work(col, c);
                inv(r, c) -= factor * inv(col, c);
            }
        }
    }
    return FactorPair::with_mask(multiply(f.a, g), multiply(inv, f.b));
}

PropertyOutcome minimality(const VerifyOptions& opt, Rng& rng) {
    double worst = 0.0;  // largest amount by which a factorization beat the closed form
    std::size_t checks = 0;
    const auto qs = exponents(opt);
    for (std::size_t c = 0; c < opt.minimality_cases; ++c) {
        const Instance inst = random_instance(rng, opt, opt.perturb);
        const std::size_t d = inst.rank + 2;
        for (GroupExponent q : qs) {
            for (BPenalty pen : {BPenalty::GroupL2, BPenalty::HalfFrobeniusSq}) {
                const FgsrSpec spec{q, 1.0, pen};
                const double closed = closed_form(inst.sigma, q.value(), 1.0, pen);
                FactorPair base = optimal_factors(inst.x, spec, d);
                // Fill the zero padding so that reparameterizations mix all columns.
                for (std::size_t j = inst.rank; j < d; ++j)
                    for (std::size_t i = 0; i < base.a.rows(); ++i)
                        base.a(i, j) = 0.1 * (uniform01(rng) - 0.5);
                for (std::size_t t = 0; t < opt.minimality_trials; ++t) {
                    const FactorPair f = perturbed_factorization(base, rng, t % 2 == 1);
                    const double value = factored_objective(f, spec);
                    worst = std::max(worst, closed - value);
                    ++checks;
                }
            }
        }
    }
    return finish("minimality", checks, std::max(worst, 0.0), opt.minimality_tol,
                  "closed form minus objective over random factorizations:");
}

PropertyOutcome alpha_invariance(const VerifyOptions& opt, Rng& rng) {
    double worst = 0.0;
    for (std::size_t c = 0; c < opt.invariance_cases; ++c) {
        const Instance inst = random_instance(rng, opt, false);
        const double ref = fgsr_value(inst.x, FgsrKind::TwoThirds, 1.0);
        for (double alpha : {0.1, 10.0})
            worst = std::max(worst, rel_gap(fgsr_value(inst.x, FgsrKind::TwoThirds, alpha), ref));
        if (opt.perturb) worst = std::max(worst, rel_gap(ref * 1.001, ref));
    }
    return finish("alpha_invariance", opt.invariance_cases, worst, opt.invariance_tol,
                  "FGSR_{2/3} spread over alpha in {0.1, 1, 10}:");
}

/// Golden-section minimizer of a unimodal function on [lo, hi].
double golden_min(const std::function<double(double)>& f, double lo, double hi) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > 1e-12 * std::max(1.0, std::abs(a) + std::abs(b))) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

PropertyOutcome prox_group_oracle(const VerifyOptions& opt, Rng& rng) {
    double worst = 0.0;
    for (std::size_t c = 0; c < opt.prox_cases; ++c) {
        const std::size_t k = draw(rng, 1, 6);
        const std::size_t cols = draw(rng, 1, 5);
        const DenseMatrix x = random_matrix(rng, k, cols);
        const double lambda = 2.5 * uniform01(rng);
        const DenseMatrix y = prox_group_l2(x, lambda);
        for (std::size_t j = 0; j < cols; ++j) {
            const auto xj = x.column(j);
            double xn = 0.0;
            for (double v : xj) xn += v * v;
            xn = std::sqrt(xn);
            // On the sphere ‖y‖ = t the objective is smallest at y = t·x/‖x‖, which leaves
            // ½(t − ‖x‖)² + λt to minimize numerically over t.
            const double t = golden_min(
                [&](double s) { return 0.5 * (s - xn) * (s - xn) + lambda * s; }, 0.0, xn + 1.0);
            double err = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                const double oracle = xn > 0.0 ? t * xj[i] / xn : 0.0;
                err = std::max(err, std::abs(oracle - y(i, j)));
            }
            worst = std::max(worst, err);
        }
    }
    return finish("prox_group_l2_oracle", opt.prox_cases, worst, opt.prox_tol,
                  "max |prox - numerical minimizer|:");
}

PropertyOutcome prox_l1_oracle(const VerifyOptions& opt, Rng& rng) {
    double worst = 0.0;
    for (std::size_t c = 0; c < opt.prox_cases; ++c) {
        const std::size_t k = draw(rng, 1, 6);
        const std::size_t cols = draw(rng, 1, 5);
        const DenseMatrix x = random_matrix(rng, k, cols);
        const double lambda = 2.0 * uniform01(rng);
        const DenseMatrix y = prox_l1(x, lambda);
        for (std::size_t e = 0; e < x.size(); ++e) {
            const double xe = x.values()[e];
            const double oracle = golden_min(
                [&](double s) { return 0.5 * (s - xe) * (s - xe) + lambda * std::abs(s); },
                -std::abs(xe) - 1.0, std::abs(xe) + 1.0);
            worst = std::max(worst, std::abs(oracle - y.values()[e]));
        }
    }
    return finish("prox_l1_oracle", opt.prox_cases, worst, opt.prox_tol,
                  "max |prox - numerical minimizer|:");
}

}  // namespace

std::vector<PropertyOutcome> run_verification(const VerifyOptions& options) {
    Rng rng = make_rng(options.seed, Stream::Verification);
    std::vector<PropertyOutcome> out;
    out.push_back(half_identity(options, rng));
    out.push_back(two_thirds_identity(options, rng));
    out.push_back(general_identity(options, rng));
    out.push_back(minimality(options, rng));
    out.push_back(alpha_invariance(options, rng));
    out.push_back(prox_group_oracle(options, rng));
    out.push_back(prox_l1_oracle(options, rng));
    return out;
}

}  // namespace fgsr
