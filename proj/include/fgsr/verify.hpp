#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fgsr/regularizers.hpp"

namespace fgsr {

struct VerifyOptions {
    std::size_t cases = 50;  ///< random matrices per identity check
    std::size_t max_rows = 20;
    std::size_t max_cols = 15;
    std::size_t max_rank = 5;
    std::size_t minimality_trials = 100;  ///< random factorizations per instance
    std::size_t minimality_cases = 10;
    std::size_t invariance_cases = 20;
    std::size_t prox_cases = 100;
    std::uint64_t seed = 0;
    /// Restricts the general-q identity check to one exponent.
    std::optional<GroupExponent> q;
    /// Negative control: the closed forms are evaluated with the leading
    /// singular value inflated by 0.1%, so the identity checks must fail.
    bool perturb = false;

    double identity_tol = 1e-9;
    double minimality_tol = 1e-8;
    double invariance_tol = 1e-9;
    double prox_tol = 1e-6;
};

struct PropertyOutcome {
    std::string name;
    bool passed = false;
    std::size_t checks = 0;
    double worst = 0.0;  ///< largest observed deviation
    std::string detail;
};

std::vector<PropertyOutcome> run_verification(const VerifyOptions& options);

}  // namespace fgsr
