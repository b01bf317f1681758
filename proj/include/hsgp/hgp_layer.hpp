#pragma once

#include <map>

#include "hsgp/bue_layer.hpp"
#include "hsgp/signal_io.hpp"

namespace hsgp {

struct InfoScores {
  Vector balanced;
  Vector unbalanced;
  Vector total;
};

struct PoolConfig {
  double ratio = 0.5;
  std::size_t layers = 3;

  /// max(1, ceil(ratio * n)).
  std::size_t keep_count(std::size_t n) const;
  void validate() const;
};

/// Dropped node -> hub it was aggregated onto, both as positions in the
/// pre-pooling graph.
using Assignment = std::map<std::size_t, std::size_t>;

struct PooledGraph {
  FunctionalNetwork network;
  IndexList kept_indices;
  Assignment assignment;
};

/// IS_B(i) = sum_j pos(i,j) |X_B(j)|_1 + sum_j neg(i,j) |X_U(j)|_1, IS_U with
/// the streams swapped, total = IS_B + IS_U.
InfoScores information_scores(const NormalizedAdjacency& norm, const NodeEmbedding& emb);

/// The k highest total scores (ties to the smaller index), returned ascending.
IndexList select_topk(const InfoScores& scores, std::size_t k);

/// Inner products of fused node rows.
Matrix feature_attention(const NodeEmbedding& emb);

/// Each non-kept node goes to the kept node with the largest attention
/// (ties to the smaller index).
Assignment assign_to_hubs(std::size_t n, const IndexList& kept, const Matrix& attn);

struct AggregatedEmbedding {
  NodeEmbedding embedding;  // rows follow `kept`
  Assignment assignment;
};

/// hub row += attn(u, hub) * x_u for every dropped node u, using the
/// pre-aggregation attention snapshot.
AggregatedEmbedding aggregate_features(const NodeEmbedding& emb, const IndexList& kept,
                                       const Matrix& attn);

PooledGraph pool_graph(const FunctionalNetwork& graph, const IndexList& kept);

/// Differentiable form of the hub update on fused rows, for a fixed
/// assignment. The attention weights are recomputed from `fused`.
ad::Var aggregate_onto_hubs(const ad::Var& fused, const IndexList& kept, const Assignment& assignment);

}  // namespace hsgp
