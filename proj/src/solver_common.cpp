#include "solver_common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eigen_bridge.hpp"
#include "fgsr/errors.hpp"
#include "fgsr/kernels.hpp"
#include "fgsr/random.hpp"

namespace fgsr::detail {

std::size_t WorkingFactors::prune(double rel_tol, bool check_b) {
    if (width() == 0) return 0;
    const auto a_norms = kernels::column_norms(a);
    const double top = *std::max_element(a_norms.begin(), a_norms.end());
    std::vector<double> b_norms;
    if (check_b) b_norms = kernels::row_norms(b);
    std::vector<std::size_t> stored;
    stored.reserve(width());
    for (std::size_t j = 0; j < width(); ++j) {
        const bool dead_a = !(a_norms[j] > rel_tol * top) || a_norms[j] == 0.0;
        const bool dead_b = check_b && b_norms[j] == 0.0;
        if (!dead_a && !dead_b) stored.push_back(j);
    }
    const std::size_t removed = width() - stored.size();
    if (removed > 0) keep(stored);
    return removed;
}

void WorkingFactors::keep(const std::vector<std::size_t>& stored) {
    DenseMatrix na(a.rows(), stored.size());
    DenseMatrix nb(stored.size(), b.cols());
    std::vector<std::size_t> nids(stored.size());
    for (std::size_t t = 0; t < stored.size(); ++t) {
        const std::size_t j = stored[t];
        for (std::size_t i = 0; i < a.rows(); ++i) na(i, t) = a(i, j);
        std::copy(b.row(j).begin(), b.row(j).end(), nb.row(t).begin());
        nids[t] = ids[j];
    }
    a = std::move(na);
    b = std::move(nb);
    ids = std::move(nids);
}

FactorPair WorkingFactors::expand(double scale) const {
    const double root = std::sqrt(scale);
    DenseMatrix fa(a.rows(), full_width);
    DenseMatrix fb(full_width, b.cols());
    std::vector<bool> active(full_width, false);
    for (std::size_t t = 0; t < width(); ++t) {
        const std::size_t j = ids[t];
        for (std::size_t i = 0; i < a.rows(); ++i) fa(i, j) = root * a(i, t);
        for (std::size_t k = 0; k < b.cols(); ++k) fb(j, k) = root * b(t, k);
        active[j] = true;
    }
    return FactorPair{std::move(fa), std::move(fb), std::move(active)};
}

WorkingFactors random_factors(std::size_t m, std::size_t n, std::size_t d, std::uint64_t seed) {
    WorkingFactors f;
    f.a = DenseMatrix(m, d);
    f.b = DenseMatrix(d, n);
    f.full_width = d;
    f.ids.resize(d);
    std::iota(f.ids.begin(), f.ids.end(), std::size_t{0});
    const double scale = std::pow(static_cast<double>(d), -0.25);
    Rng rng = make_rng(seed, Stream::FactorInit);
    fill_standard_normal(rng, f.a.values(), scale);
    fill_standard_normal(rng, f.b.values(), scale);
    return f;
}

namespace {

double hadamard_sum(const DenseMatrix& x, const DenseMatrix& y) {
    double acc = 0.0;
    for (std::size_t e = 0; e < x.size(); ++e) acc += x.values()[e] * y.values()[e];
    return acc;
}

}  // namespace

double product_norm_sq(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() == 0) return 0.0;
    return std::max(0.0, hadamard_sum(multiply_at_b(a, a), multiply_a_bt(b, b)));
}

double product_diff_sq(const DenseMatrix& a1, const DenseMatrix& b1, const DenseMatrix& a2,
                       const DenseMatrix& b2) {
    if (a1.cols() == a2.cols() && a1.cols() > 0) {
        // a2·b2 − a1·b1 = (a2 − a1)·b2 + a1·(b2 − b1): no cancellation
        // between the two full norms, so small changes stay resolvable.
        const std::size_t d = a1.cols();
        DenseMatrix p(a1.rows(), 2 * d);
        DenseMatrix q(2 * d, b1.cols());
        for (std::size_t i = 0; i < a1.rows(); ++i)
            for (std::size_t j = 0; j < d; ++j) {
                p(i, j) = a2(i, j) - a1(i, j);
                p(i, d + j) = a1(i, j);
            }
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < b1.cols(); ++k) {
                q(j, k) = b2(j, k);
                q(d + j, k) = b2(j, k) - b1(j, k);
            }
        return product_norm_sq(p, q);
    }
    const double n1 = product_norm_sq(a1, b1);
    const double n2 = product_norm_sq(a2, b2);
    const double cross = (a1.cols() == 0 || a2.cols() == 0)
                             ? 0.0
                             : hadamard_sum(multiply_at_b(a1, a2), multiply_a_bt(b1, b2));
    return std::max(0.0, n1 - 2.0 * cross + n2);
}

DenseMatrix solve_shifted_spd(const DenseMatrix& gram, double shift, const DenseMatrix& rhs) {
    if (gram.rows() == 0) return DenseMatrix(0, rhs.cols());
    RowMajorMatrix g = as_eigen(gram);
    g.diagonal().array() += shift;
    Eigen::LLT<RowMajorMatrix> llt(g);
    if (llt.info() != Eigen::Success) {
        Eigen::LDLT<RowMajorMatrix> ldlt(g);
        return from_eigen(ldlt.solve(as_eigen(rhs)));
    }
    return from_eigen(llt.solve(as_eigen(rhs)));
}

std::vector<double> product_singular_values(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() == 0) return {};
    const Eigen::Index d = static_cast<Eigen::Index>(a.cols());
    Eigen::MatrixXd am = as_eigen(a);
    Eigen::MatrixXd btm = as_eigen(b).transpose();
    Eigen::HouseholderQR<Eigen::MatrixXd> qa(am);
    Eigen::HouseholderQR<Eigen::MatrixXd> qb(btm);
    const Eigen::Index ra = std::min<Eigen::Index>(am.rows(), d);
    const Eigen::Index rb = std::min<Eigen::Index>(btm.rows(), d);
    Eigen::MatrixXd r_a = qa.matrixQR().topRows(ra).triangularView<Eigen::Upper>();
    Eigen::MatrixXd r_b = qb.matrixQR().topRows(rb).triangularView<Eigen::Upper>();
    Eigen::MatrixXd core = r_a * r_b.transpose();
    return thin_svd(from_eigen(core)).s;
}

double a_penalty(const DenseMatrix& a, double q, double eps) {
    const auto norms = kernels::column_norms(a);
    double acc = 0.0;
    if (q == 1.0) {
        for (double v : norms) acc += v;
        return acc;
    }
    for (double v : norms) acc += std::pow(v + eps, q);
    return acc / q;
}

double b_penalty(const DenseMatrix& b, BPenalty penalty, double alpha) {
    if (penalty == BPenalty::HalfFrobeniusSq) return 0.5 * alpha * frobenius_norm_sq(b);
    const auto norms = kernels::row_norms(b);
    double acc = 0.0;
    for (double v : norms) acc += v;
    return alpha * acc;
}

double spectral_sq(const DenseMatrix& x) {
    return x.empty() ? 0.0 : spectral_norm_sq_estimate(x);
}

std::vector<double> sampled_product(const DenseMatrix& a, const DenseMatrix& b,
                                    const kernels::SamplingPattern& omega) {
    std::vector<double> out(omega.nnz(), 0.0);
    if (a.cols() > 0) kernels::sampled_product(a, b, omega, out);
    return out;
}

double dot(std::span<const double> x, std::span<const double> y) {
    return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

double norm_sq(std::span<const double> x) { return dot(x, x); }

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

std::size_t resolve_width(const SolverConfig& config, const ObservationSet& omega) {
    return config.d > 0 ? config.d : default_rank_heuristic(omega);
}

void check_divergence(double value, double limit, const std::vector<double>& trace,
                      const char* solver, const char* what) {
    if (!std::isfinite(value) || value > limit) {
        throw DivergenceError(std::string(solver) + ": " + what + " reached " +
                                  std::to_string(value) + " (limit " + std::to_string(limit) +
                                  ") after " + std::to_string(trace.size()) + " iterations",
                              trace);
    }
}

}  // namespace fgsr::detail
