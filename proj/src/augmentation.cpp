#include "hsgp/augmentation.hpp"

#include <algorithm>
#include <cmath>

#include "hsgp/errors.hpp"

namespace hsgp {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "adjacency shapes differ");
  }
}

}  // namespace

std::pair<Matrix, Matrix> clamp_signals(const Matrix& signals, std::size_t window_size) {
  const auto d = static_cast<Eigen::Index>(window_size);
  const Eigen::Index length = signals.cols();
  if (d >= length) {
    throw Error(ErrorCode::WindowTooLarge, "window size " + std::to_string(window_size) +
                                               " must be smaller than signal length " +
                                               std::to_string(length));
  }
  if (length - d < static_cast<Eigen::Index>(kMinTimepoints)) {
    throw Error(ErrorCode::WindowLeavesTooFew,
                "window size " + std::to_string(window_size) + " leaves fewer than 4 timepoints");
  }
  return {signals.rightCols(length - d), signals.leftCols(length - d)};
}

ContrastivePair augment_pair(const BoldMatrix& bold, const AugmentConfig& cfg,
                             std::string subject_id) {
  validate(bold);
  auto [hat, check] = clamp_signals(bold.data, cfg.window_size);
  ContrastivePair pair;
  pair.subject_id = std::move(subject_id);
  pair.hat_network.adjacency = correlation_matrix(hat);
  pair.hat_network.features = node_features(bold);
  pair.hat_network.node_labels = bold.node_labels;
  pair.check_network.adjacency = correlation_matrix(check);
  pair.check_network.features = pair.hat_network.features;
  pair.check_network.node_labels = bold.node_labels;
  return pair;
}

SimilarityMetric parse_metric(const std::string& name) {
  if (name == "cosine") return SimilarityMetric::Cosine;
  if (name == "l1") return SimilarityMetric::L1;
  if (name == "l2") return SimilarityMetric::L2;
  throw Error(ErrorCode::ConfigError, "unknown metric '" + name + "' (expected cosine, l1, l2)");
}

std::string to_string(SimilarityMetric metric) {
  switch (metric) {
    case SimilarityMetric::Cosine: return "cosine";
    case SimilarityMetric::L1: return "l1";
    case SimilarityMetric::L2: return "l2";
  }
  return "cosine";
}

double adjacency_cosine(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b);
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroMatrix, "cosine of a zero matrix");
  return std::clamp(a.cwiseProduct(b).sum() / (na * nb), -1.0, 1.0);
}

double adjacency_l1_distance(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b);
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().mean();
}

double adjacency_l2_distance(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b);
  if (a.size() == 0) return 0.0;
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

double adjacency_similarity(const Matrix& a, const Matrix& b, SimilarityMetric metric) {
  switch (metric) {
    case SimilarityMetric::Cosine: return adjacency_cosine(a, b);
    case SimilarityMetric::L1: return adjacency_l1_distance(a, b);
    case SimilarityMetric::L2: return adjacency_l2_distance(a, b);
  }
  return 0.0;
}

PairSimilarity pair_similarity_stats(const std::vector<ContrastivePair>& pairs,
                                     SimilarityMetric metric) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyDataset, "no contrastive pairs");
  const double m = static_cast<double>(pairs.size());
  PairSimilarity out;
  for (const auto& pair : pairs) {
    out.inner += adjacency_similarity(pair.hat_network.adjacency, pair.check_network.adjacency, metric);
  }
  for (const auto& anchor : pairs) {
    for (const auto& other : pairs) {
      out.inter += adjacency_similarity(anchor.hat_network.adjacency, other.check_network.adjacency, metric);
    }
  }
  out.inner /= m;
  out.inter /= m * m;
  return out;
}

}  // namespace hsgp
