#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fgsr/matrix.hpp"

namespace fgsr {

/// Group exponent q restricted to {1, 1/2, 1/4, 1/8}, stored as q = 2^-halvings.
class GroupExponent {
public:
    constexpr GroupExponent() = default;

    static GroupExponent from_halvings(int halvings);
    /// Accepts 1, 0.5, 0.25, 0.125 (exactly representable); anything else throws InputError.
    static GroupExponent from_value(double q);
    /// Parses "1", "1/2", "0.25", ...
    static GroupExponent parse(const std::string& text);

    constexpr int halvings() const noexcept { return halvings_; }
    double value() const noexcept;
    bool is_one() const noexcept { return halvings_ == 0; }
    std::string to_string() const;

    friend constexpr bool operator==(GroupExponent, GroupExponent) = default;

private:
    explicit constexpr GroupExponent(int halvings) : halvings_(halvings) {}
    int halvings_ = 0;
};

/// Penalty applied to the rows b_j of the right factor.
enum class BPenalty {
    GroupL2,          ///< α Σ‖b_j‖
    HalfFrobeniusSq,  ///< (α/2) Σ‖b_j‖²
};

struct FgsrSpec {
    GroupExponent q{};
    double alpha = 1.0;
    BPenalty b_penalty = BPenalty::HalfFrobeniusSq;

    void validate() const;
    /// Schatten exponent p whose p-th power the regularizer reproduces.
    double schatten_p() const;
};

/// Factorization X = A·B with A m×d, B d×n and a per-column activity mask.
struct FactorPair {
    DenseMatrix a;
    DenseMatrix b;
    std::vector<bool> active_columns;

    /// Marks column j inactive iff ‖a_j‖ ≤ prune_tol and ‖b_j‖ ≤ prune_tol.
    static FactorPair with_mask(DenseMatrix a, DenseMatrix b, double prune_tol = 0.0);

    std::size_t width() const noexcept { return a.cols(); }
    std::size_t active_count() const noexcept;
    DenseMatrix product() const;
};

double group_l21(const DenseMatrix& x);
/// Σ_j ‖x_j‖^q over columns; ‖0‖^q is taken as 0.
double group_l2q_pow(const DenseMatrix& x, double q);
/// Σ σ_i(x)^p; singular values below the rank threshold contribute nothing.
double schatten_p_power(const DenseMatrix& x, double p);
double schatten_p_power(std::span<const double> singular_values, double p);

double factored_objective(const FactorPair& f, const FgsrSpec& spec);

/// Closed-form minimum of factored_objective over all factorizations of x:
/// (1+1/q)·α^{q/(q+1)}·Σσ^{q/(q+1)} for GroupL2 and
/// (1/2+1/q)·α^{q/(q+2)}·Σσ^{2q/(2+q)} for HalfFrobeniusSq.
double factored_minimum(std::span<const double> singular_values, const FgsrSpec& spec);
double factored_minimum(const DenseMatrix& x, const FgsrSpec& spec);

/// Minimizing factors built from the SVD of x, padded with zero columns up to d.
FactorPair optimal_factors(const DenseMatrix& x, const FgsrSpec& spec, std::size_t d);

enum class FgsrKind { Half, TwoThirds };

/// FGSR_{1/2}(x) = Σσ^{1/2} or FGSR_{2/3}(x) = Σσ^{2/3}, evaluated at the optimal factors.
double fgsr_value(const DenseMatrix& x, FgsrKind which, double alpha = 1.0);

}  // namespace fgsr
