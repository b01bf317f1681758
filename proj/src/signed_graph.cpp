#include "hsgp/signed_graph.hpp"

#include <cmath>

#include "hsgp/errors.hpp"

namespace hsgp {

bool is_symmetric(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
      if (std::abs(a(i, j) - a(j, i)) > tol) return false;
    }
  }
  return true;
}

SignSplit split_signs(const Matrix& adjacency) {
  if (!is_symmetric(adjacency)) {
    throw Error(ErrorCode::AsymmetricInput, "adjacency must be square and symmetric");
  }
  return SignSplit{adjacency.cwiseMax(0.0), (-adjacency).cwiseMax(0.0)};
}

Matrix symmetric_normalize(const Matrix& weights) {
  const Vector degree = weights.rowwise().sum();
  Vector inv_sqrt(degree.size());
  for (Eigen::Index i = 0; i < degree.size(); ++i) {
    inv_sqrt[i] = degree[i] > 0.0 ? 1.0 / std::sqrt(degree[i]) : 0.0;
  }
  return inv_sqrt.asDiagonal() * weights * inv_sqrt.asDiagonal();
}

NormalizedAdjacency laplace_normalize(const SignSplit& split) {
  return NormalizedAdjacency{symmetric_normalize(split.positive),
                             symmetric_normalize(split.negative_abs)};
}

}  // namespace hsgp
