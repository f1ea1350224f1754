#pragma once

#include <Eigen/Dense>

#include "fgsr/matrix.hpp"

namespace fgsr::detail {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMajorMatrix>;
using MatrixMap = Eigen::Map<RowMajorMatrix>;

inline ConstMatrixMap as_eigen(const DenseMatrix& x) {
    return ConstMatrixMap(x.values().data(), static_cast<Eigen::Index>(x.rows()),
                          static_cast<Eigen::Index>(x.cols()));
}

inline MatrixMap as_eigen(DenseMatrix& x) {
    return MatrixMap(x.values().data(), static_cast<Eigen::Index>(x.rows()),
                     static_cast<Eigen::Index>(x.cols()));
}

template <typename Derived>
DenseMatrix from_eigen(const Eigen::MatrixBase<Derived>& m) {
    DenseMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    as_eigen(out) = m;
    return out;
}

}  // namespace fgsr::detail
