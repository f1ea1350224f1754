#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fgsr/kernels.hpp"
#include "fgsr/matrix.hpp"

namespace fgsr {

struct Observation {
    std::uint32_t row = 0;
    std::uint32_t col = 0;
    double value = 0.0;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// The sampled entries P_Ω(M): distinct in-range indices with their values,
/// held in row-major order.
class ObservationSet {
public:
    ObservationSet() = default;
    /// Sorts entries row-major; rejects out-of-range, duplicate or non-finite entries.
    ObservationSet(std::size_t rows, std::size_t cols, std::vector<Observation> entries);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    const std::vector<Observation>& entries() const noexcept { return entries_; }

    std::vector<double> values() const;
    kernels::SamplingPattern pattern() const;
    /// Same index set carrying new values (in entry order).
    ObservationSet with_values(const std::vector<double>& values) const;
    bool same_indices(const ObservationSet& other) const noexcept;
    /// Dense matrix holding the observed values and zeros elsewhere.
    DenseMatrix to_dense() const;
    /// 0/1 mask of the index set.
    std::vector<std::uint8_t> mask() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Observation> entries_;
};

/// Values of x at the indices of omega.
ObservationSet project_omega(const DenseMatrix& x, const ObservationSet& omega);

}  // namespace fgsr
