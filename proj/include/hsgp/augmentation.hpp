#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hsgp/signal_io.hpp"

namespace hsgp {

struct AugmentConfig {
  std::size_t window_size = 10;
};

/// Two views of one subject built from head- and tail-clamped signals.
/// Both views carry the same feature matrix, computed from the full signal.
struct ContrastivePair {
  FunctionalNetwork hat_network;    // signal without its first d samples
  FunctionalNetwork check_network;  // signal without its last d samples
  std::string subject_id;
};

/// Head/tail clamped copies of every row: hat = b[d..D), check = b[0..D-d).
std::pair<Matrix, Matrix> clamp_signals(const Matrix& signals, std::size_t window_size);

ContrastivePair augment_pair(const BoldMatrix& bold, const AugmentConfig& cfg,
                             std::string subject_id = {});

enum class SimilarityMetric { Cosine, L1, L2 };

SimilarityMetric parse_metric(const std::string& name);
std::string to_string(SimilarityMetric metric);

/// Cosine of the two matrices flattened over all entries.
double adjacency_cosine(const Matrix& a, const Matrix& b);
/// Entry-averaged absolute difference.
double adjacency_l1_distance(const Matrix& a, const Matrix& b);
/// Entry-averaged Euclidean distance: sqrt(mean((a - b)^2)).
double adjacency_l2_distance(const Matrix& a, const Matrix& b);

double adjacency_similarity(const Matrix& a, const Matrix& b, SimilarityMetric metric);

struct PairSimilarity {
  double inner = 0.0;
  double inter = 0.0;
};

/// inner = mean over m of psi(hat_m, check_m);
/// inter = mean over all (m, t), including m == t, of psi(hat_m, check_t).
PairSimilarity pair_similarity_stats(const std::vector<ContrastivePair>& pairs,
                                     SimilarityMetric metric);

}  // namespace hsgp
