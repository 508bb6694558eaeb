#pragma once

#include <Eigen/Core>

namespace wmfcc {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

// Sequences of frames are stored one frame per row.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

}  // namespace wmfcc
