#pragma once

#include "hsgp/types.hpp"

namespace hsgp {

/// A = positive - negative_abs with disjoint supports.
struct SignSplit {
  Matrix positive;
  Matrix negative_abs;
};

/// D^-1/2 A D^-1/2 of each sign part; zero-degree rows stay zero.
struct NormalizedAdjacency {
  Matrix pos_norm;
  Matrix neg_norm;

  std::size_t nodes() const { return static_cast<std::size_t>(pos_norm.rows()); }
};

inline constexpr double kSymmetryTolerance = 1e-12;

bool is_symmetric(const Matrix& a, double tol = kSymmetryTolerance);

SignSplit split_signs(const Matrix& adjacency);

/// Symmetric degree normalization of one nonnegative matrix.
Matrix symmetric_normalize(const Matrix& weights);

NormalizedAdjacency laplace_normalize(const SignSplit& split);

inline NormalizedAdjacency normalize_signed(const Matrix& adjacency) {
  return laplace_normalize(split_signs(adjacency));
}

}  // namespace hsgp
