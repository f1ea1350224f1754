#include "fgsr/observations.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fgsr/errors.hpp"

namespace fgsr {

ObservationSet::ObservationSet(std::size_t rows, std::size_t cols,
                               std::vector<Observation> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    for (const auto& e : entries_) {
        if (e.row >= rows_ || e.col >= cols_) {
            throw DimensionError("ObservationSet: index (" + std::to_string(e.row) + ", " +
                                 std::to_string(e.col) + ") outside " + std::to_string(rows_) +
                                 "x" + std::to_string(cols_));
        }
        if (!std::isfinite(e.value)) throw InputError("ObservationSet: non-finite value");
    }
    auto row_major = [](const Observation& a, const Observation& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    };
    if (!std::is_sorted(entries_.begin(), entries_.end(), row_major))
        std::sort(entries_.begin(), entries_.end(), row_major);
    const auto dup = std::adjacent_find(entries_.begin(), entries_.end(),
                                        [](const Observation& a, const Observation& b) {
                                            return a.row == b.row && a.col == b.col;
                                        });
    if (dup != entries_.end()) {
        throw InputError("ObservationSet: duplicate index (" + std::to_string(dup->row) + ", " +
                         std::to_string(dup->col) + ")");
    }
}

std::vector<double> ObservationSet::values() const {
    std::vector<double> out(entries_.size());
    for (std::size_t e = 0; e < entries_.size(); ++e) out[e] = entries_[e].value;
    return out;
}

kernels::SamplingPattern ObservationSet::pattern() const {
    std::vector<std::uint32_t> r(entries_.size());
    std::vector<std::uint32_t> c(entries_.size());
    for (std::size_t e = 0; e < entries_.size(); ++e) {
        r[e] = entries_[e].row;
        c[e] = entries_[e].col;
    }
    return kernels::SamplingPattern::from_sorted(rows_, cols_, std::move(r), std::move(c));
}

ObservationSet ObservationSet::with_values(const std::vector<double>& values) const {
    if (values.size() != entries_.size()) {
        throw DimensionError("ObservationSet::with_values: length mismatch");
    }
    ObservationSet out = *this;
    for (std::size_t e = 0; e < values.size(); ++e) {
        if (!std::isfinite(values[e])) throw InputError("ObservationSet: non-finite value");
        out.entries_[e].value = values[e];
    }
    return out;
}

bool ObservationSet::same_indices(const ObservationSet& other) const noexcept {
    if (rows_ != other.rows_ || cols_ != other.cols_ || size() != other.size()) return false;
    for (std::size_t e = 0; e < entries_.size(); ++e) {
        if (entries_[e].row != other.entries_[e].row || entries_[e].col != other.entries_[e].col)
            return false;
    }
    return true;
}

DenseMatrix ObservationSet::to_dense() const {
    DenseMatrix out(rows_, cols_);
    for (const auto& e : entries_) out(e.row, e.col) = e.value;
    return out;
}

std::vector<std::uint8_t> ObservationSet::mask() const {
    std::vector<std::uint8_t> out(rows_ * cols_, 0);
    for (const auto& e : entries_) out[static_cast<std::size_t>(e.row) * cols_ + e.col] = 1;
    return out;
}

ObservationSet project_omega(const DenseMatrix& x, const ObservationSet& omega) {
    if (x.rows() != omega.rows() || x.cols() != omega.cols()) {
        throw DimensionError("project_omega: matrix is " + std::to_string(x.rows()) + "x" +
                             std::to_string(x.cols()) + " but the index set is " +
                             std::to_string(omega.rows()) + "x" + std::to_string(omega.cols()));
    }
    std::vector<Observation> entries = omega.entries();
    for (auto& e : entries) e.value = x(e.row, e.col);
    return ObservationSet(omega.rows(), omega.cols(), std::move(entries));
}

}  // namespace fgsr
