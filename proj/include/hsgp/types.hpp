#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace hsgp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Node positions within one graph (0-based, ascending where documented).
using IndexList = std::vector<std::size_t>;

}  // namespace hsgp
