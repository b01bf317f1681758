#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hsgp/types.hpp"

namespace hsgp {

inline constexpr std::size_t kMinTimepoints = 4;

/// N x D time-series matrix, one row per node (ROI).
struct BoldMatrix {
  Matrix data;
  std::vector<std::string> node_labels;

  std::size_t nodes() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t timepoints() const { return static_cast<std::size_t>(data.cols()); }
};

/// Signed correlation graph with per-node features. The adjacency is
/// symmetric with a zero diagonal and entries in [-1, 1].
struct FunctionalNetwork {
  Matrix adjacency;
  Matrix features;
  std::vector<std::string> node_labels;

  std::size_t nodes() const { return static_cast<std::size_t>(adjacency.rows()); }
};

/// Checks the BoldMatrix invariants; throws hsgp::Error on violation.
void validate(const BoldMatrix& bold);

BoldMatrix load_bold_csv(const std::filesystem::path& path);
void save_bold_csv(const BoldMatrix& bold, const std::filesystem::path& path);

/// Column 0 = skewness, column 1 = excess kurtosis (population moments).
/// Constant rows map to (0, 0).
Matrix node_features(const BoldMatrix& bold);

/// Pearson correlation of two equally long series; 0 if either is constant.
double pearson(const RowVector& a, const RowVector& b);

/// Pairwise Pearson correlation of all rows with the diagonal zeroed.
Matrix correlation_matrix(const Matrix& signals);

FunctionalNetwork pearson_network(const BoldMatrix& bold);

/// Adjacency CSV with node labels as header row and first column.
void save_network_csv(const FunctionalNetwork& network, const std::filesystem::path& path);
Matrix load_network_csv(const std::filesystem::path& path, std::vector<std::string>* labels = nullptr);

}  // namespace hsgp
