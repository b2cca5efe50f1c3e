#pragma once

#include <Eigen/Core>

namespace eotcoloc {

// Row-major storage: solver passes walk rows of the cost matrix contiguously.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace eotcoloc
