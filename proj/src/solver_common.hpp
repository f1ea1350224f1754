#pragma once

// Internal helpers shared by the completion and RPCA solvers.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fgsr/kernels.hpp"
#include "fgsr/lrmc.hpp"
#include "fgsr/matrix.hpp"
#include "fgsr/regularizers.hpp"

namespace fgsr::detail {

/// Factor iterates with pruned columns removed from storage. ids maps each
/// stored column back to its index in the caller's width-d factorization.
struct WorkingFactors {
    DenseMatrix a;
    DenseMatrix b;
    std::vector<std::size_t> ids;
    std::size_t full_width = 0;

    std::size_t width() const noexcept { return a.cols(); }

    /// Drops columns whose A norm is ≤ rel_tol · max norm (or, with check_b, whose B row
    /// is zero). Returns the number removed.
    std::size_t prune(double rel_tol, bool check_b);
    /// Keeps only the listed stored columns.
    void keep(const std::vector<std::size_t>& stored);
    /// Re-expands to the original width; A and B are each scaled by sqrt(scale).
    FactorPair expand(double scale) const;
};

/// Random start: entries i.i.d. N(0, 1/√d) so that AB has roughly unit RMS.
WorkingFactors random_factors(std::size_t m, std::size_t n, std::size_t d, std::uint64_t seed);

/// ‖A1·B1 − A2·B2‖_F² from Gram products, O((m+n)·d1·d2).
double product_diff_sq(const DenseMatrix& a1, const DenseMatrix& b1, const DenseMatrix& a2,
                       const DenseMatrix& b2);
/// ‖A·B‖_F² from Gram products.
double product_norm_sq(const DenseMatrix& a, const DenseMatrix& b);

/// Solves (G + shift·I) X = rhs for symmetric positive definite G (d×d), rhs d×n.
DenseMatrix solve_shifted_spd(const DenseMatrix& gram, double shift, const DenseMatrix& rhs);

/// Singular values of A·B via thin QR of both factors.
std::vector<double> product_singular_values(const DenseMatrix& a, const DenseMatrix& b);

/// Σ‖a_j‖ when q = 1, otherwise (1/q)Σ(‖a_j‖ + eps)^q.
double a_penalty(const DenseMatrix& a, double q, double eps);
/// (α/2)‖B‖_F² or αΣ‖b_j‖ over the rows of B.
double b_penalty(const DenseMatrix& b, BPenalty penalty, double alpha);
/// spectral_norm_sq_estimate, 0 for an empty matrix.
double spectral_sq(const DenseMatrix& x);
/// Values of A·B on the sampled entries (zeros when A has no columns).
std::vector<double> sampled_product(const DenseMatrix& a, const DenseMatrix& b,
                                    const kernels::SamplingPattern& omega);

double dot(std::span<const double> x, std::span<const double> y);
double norm_sq(std::span<const double> x);
double median(std::vector<double> v);

std::size_t resolve_width(const SolverConfig& config, const ObservationSet& omega);

/// Throws DivergenceError if value is not finite or exceeds the limit.
void check_divergence(double value, double limit, const std::vector<double>& trace,
                      const char* solver, const char* what);

}  // namespace fgsr::detail
