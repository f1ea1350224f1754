#include "fgsr/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fgsr/errors.hpp"
#include "fgsr/kernels.hpp"

namespace fgsr {

GroupExponent GroupExponent::from_halvings(int halvings) {
    if (halvings < 0 || halvings > 3) {
        throw InputError("q must be one of 1, 1/2, 1/4, 1/8 (got 2^-" + std::to_string(halvings) +
                         ")");
    }
    return GroupExponent(halvings);
}

GroupExponent GroupExponent::from_value(double q) {
    for (int k = 0; k <= 3; ++k) {
        if (q == std::ldexp(1.0, -k)) return GroupExponent(k);
    }
    std::ostringstream msg;
    msg << "q must be one of 1, 1/2, 1/4, 1/8 (got " << q << ")";
    throw InputError(msg.str());
}

GroupExponent GroupExponent::parse(const std::string& text) {
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos) return from_value(std::stod(text));
        const double num = std::stod(text.substr(0, slash));
        const double den = std::stod(text.substr(slash + 1));
        if (den == 0.0) throw InputError("q: zero denominator in '" + text + "'");
        return from_value(num / den);
    } catch (const std::invalid_argument&) {
        throw InputError("q: cannot parse '" + text + "'");
    } catch (const std::out_of_range&) {
        throw InputError("q: cannot parse '" + text + "'");
    }
}

double GroupExponent::value() const noexcept { return std::ldexp(1.0, -halvings_); }

std::string GroupExponent::to_string() const {
    return halvings_ == 0 ? "1" : "1/" + std::to_string(1 << halvings_);
}

void FgsrSpec::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("alpha must be positive");
}

double FgsrSpec::schatten_p() const {
    const double qv = q.value();
    return b_penalty == BPenalty::GroupL2 ? qv / (qv + 1.0) : 2.0 * qv / (2.0 + qv);
}

FactorPair FactorPair::with_mask(DenseMatrix a, DenseMatrix b, double prune_tol) {
    if (a.cols() != b.rows()) {
        throw DimensionError("FactorPair: A has " + std::to_string(a.cols()) +
                             " columns but B has " + std::to_string(b.rows()) + " rows");
    }
    const auto a_norms = kernels::column_norms(a);
    const auto b_norms = kernels::row_norms(b);
    std::vector<bool> active(a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j)
        active[j] = !(a_norms[j] <= prune_tol && b_norms[j] <= prune_tol);
    return FactorPair{std::move(a), std::move(b), std::move(active)};
}

std::size_t FactorPair::active_count() const noexcept {
    return static_cast<std::size_t>(
        std::count(active_columns.begin(), active_columns.end(), true));
}

DenseMatrix FactorPair::product() const { return multiply(a, b); }

double group_l21(const DenseMatrix& x) {
    const auto norms = kernels::column_norms(x);
    double acc = 0.0;
    for (double v : norms) acc += v;
    return acc;
}

double group_l2q_pow(const DenseMatrix& x, double q) {
    if (!(q > 0.0 && q <= 1.0)) throw InputError("group_l2q_pow: q must lie in (0, 1]");
    const auto norms = kernels::column_norms(x);
    double acc = 0.0;
    for (double v : norms)
        if (v > 0.0) acc += std::pow(v, q);
    return acc;
}

double schatten_p_power(std::span<const double> singular_values, double p) {
    if (!(p > 0.0)) throw InputError("schatten_p_power: p must be positive");
    const std::size_t rank = numeric_rank(singular_values);
    std::vector<double> sorted(singular_values.begin(), singular_values.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double acc = 0.0;
    for (std::size_t i = 0; i < rank; ++i) acc += std::pow(sorted[i], p);
    return acc;
}

double schatten_p_power(const DenseMatrix& x, double p) {
    return schatten_p_power(thin_svd(x).s, p);
}

double factored_objective(const FactorPair& f, const FgsrSpec& spec) {
    spec.validate();
    if (f.a.cols() != f.b.rows()) throw DimensionError("factored_objective: inner widths differ");
    const double q = spec.q.value();
    const auto a_norms = kernels::column_norms(f.a);
    const auto b_norms = kernels::row_norms(f.b);
    double acc = 0.0;
    for (std::size_t j = 0; j < a_norms.size(); ++j) {
        if (a_norms[j] > 0.0) acc += std::pow(a_norms[j], q) / q;
        acc += spec.b_penalty == BPenalty::GroupL2 ? spec.alpha * b_norms[j]
                                                   : 0.5 * spec.alpha * b_norms[j] * b_norms[j];
    }
    return acc;
}

double factored_minimum(std::span<const double> singular_values, const FgsrSpec& spec) {
    spec.validate();
    const double q = spec.q.value();
    if (spec.b_penalty == BPenalty::GroupL2) {
        return (1.0 + 1.0 / q) * std::pow(spec.alpha, q / (q + 1.0)) *
               schatten_p_power(singular_values, q / (q + 1.0));
    }
    return (0.5 + 1.0 / q) * std::pow(spec.alpha, q / (q + 2.0)) *
           schatten_p_power(singular_values, 2.0 * q / (2.0 + q));
}

double factored_minimum(const DenseMatrix& x, const FgsrSpec& spec) {
    return factored_minimum(thin_svd(x).s, spec);
}

FactorPair optimal_factors(const DenseMatrix& x, const FgsrSpec& spec, std::size_t d) {
    spec.validate();
    const ThinSvd svd = thin_svd(x);
    const std::size_t rank = numeric_rank(svd.s);
    if (d < rank) {
        throw InfeasibleRankError("optimal_factors: width d=" + std::to_string(d) +
                                  " is below rank " + std::to_string(rank));
    }
    const double q = spec.q.value();
    // A = α^{1/(q+c)} U S^{c/(q+c)}, B = α^{-1/(q+c)} S^{q/(q+c)} Vᵀ with c = 1 (GroupL2) or 2.
    const double c = spec.b_penalty == BPenalty::GroupL2 ? 1.0 : 2.0;
    const double a_scale = std::pow(spec.alpha, 1.0 / (q + c));
    const double b_scale = 1.0 / a_scale;

    DenseMatrix a(x.rows(), d);
    DenseMatrix b(d, x.cols());
    std::vector<bool> active(d, false);
    for (std::size_t j = 0; j < rank; ++j) {
        const double sigma = svd.s[j];
        const double a_col = a_scale * std::pow(sigma, c / (q + c));
        const double b_row = b_scale * std::pow(sigma, q / (q + c));
        for (std::size_t i = 0; i < x.rows(); ++i) a(i, j) = a_col * svd.u(i, j);
        for (std::size_t k = 0; k < x.cols(); ++k) b(j, k) = b_row * svd.vt(j, k);
        active[j] = true;
    }
    return FactorPair{std::move(a), std::move(b), std::move(active)};
}

double fgsr_value(const DenseMatrix& x, FgsrKind which, double alpha) {
    if (!(alpha > 0.0)) throw InputError("fgsr_value: alpha must be positive");
    const std::size_t rank = numeric_rank(x);
    if (which == FgsrKind::Half) {
        const FgsrSpec spec{GroupExponent{}, 1.0, BPenalty::GroupL2};
        return 0.5 * factored_objective(optimal_factors(x, spec, rank), spec);
    }
    const FgsrSpec spec{GroupExponent{}, alpha, BPenalty::HalfFrobeniusSq};
    return 2.0 / (3.0 * std::cbrt(alpha)) *
           factored_objective(optimal_factors(x, spec, rank), spec);
}

}  // namespace fgsr
