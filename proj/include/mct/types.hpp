#pragma once

#include <Eigen/Dense>

namespace mct {

// Samples are stored one per row; row-major keeps each sample contiguous.
template <typename Scalar>
using RowMatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using RowMatrix = RowMatrixX<double>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

}  // namespace mct
