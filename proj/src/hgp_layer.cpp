#include "hsgp/hgp_layer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hsgp/errors.hpp"

namespace hsgp {
namespace {

void check_kept(const IndexList& kept, std::size_t n) {
  if (kept.empty()) throw Error(ErrorCode::EmptyKeptSet, "no hub nodes kept");
  for (std::size_t k = 0; k < kept.size(); ++k) {
    if (kept[k] >= n) throw Error(ErrorCode::IndexOutOfRange, "kept index out of range");
    if (k > 0 && kept[k] <= kept[k - 1]) {
      throw Error(ErrorCode::IndexOutOfRange, "kept indices must be strictly increasing");
    }
  }
}

// Position of each kept node in the pooled graph, or -1.
std::vector<long> kept_positions(std::size_t n, const IndexList& kept) {
  std::vector<long> pos(n, -1);
  for (std::size_t k = 0; k < kept.size(); ++k) pos[kept[k]] = static_cast<long>(k);
  return pos;
}

}  // namespace

std::size_t PoolConfig::keep_count(std::size_t n) const {
  const auto k = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n, 1));
}

void PoolConfig::validate() const {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw Error(ErrorCode::ConfigError, "pool ratio must be in (0, 1]");
  if (layers == 0) throw Error(ErrorCode::ConfigError, "at least one pooling layer is required");
}

InfoScores information_scores(const NormalizedAdjacency& norm, const NodeEmbedding& emb) {
  const Eigen::Index n = emb.balanced.rows();
  if (norm.pos_norm.rows() != n || norm.neg_norm.rows() != n || emb.unbalanced.rows() != n) {
    throw Error(ErrorCode::ShapeMismatch, "information scores: graph and embedding sizes differ");
  }
  const Vector mass_b = emb.balanced.cwiseAbs().rowwise().sum();
  const Vector mass_u = emb.unbalanced.cwiseAbs().rowwise().sum();
  InfoScores s;
  s.balanced = norm.pos_norm * mass_b + norm.neg_norm * mass_u;
  s.unbalanced = norm.pos_norm * mass_u + norm.neg_norm * mass_b;
  s.total = s.balanced + s.unbalanced;
  return s;
}

IndexList select_topk(const InfoScores& scores, std::size_t k) {
  const auto n = static_cast<std::size_t>(scores.total.size());
  if (k < 1 || k > n) {
    throw Error(ErrorCode::KOutOfRange, "K=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  IndexList order(n);
  std::iota(order.begin(), order.end(), 0);
  const Vector& total = scores.total;
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (total[a] != total[b]) return total[a] > total[b];
                      return a < b;
                    });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

Matrix feature_attention(const NodeEmbedding& emb) { return emb.fused * emb.fused.transpose(); }

Assignment assign_to_hubs(std::size_t n, const IndexList& kept, const Matrix& attn) {
  check_kept(kept, n);
  if (static_cast<std::size_t>(attn.rows()) != n || static_cast<std::size_t>(attn.cols()) != n) {
    throw Error(ErrorCode::ShapeMismatch, "attention matrix does not match node count");
  }
  const auto pos = kept_positions(n, kept);
  Assignment assignment;
  for (std::size_t u = 0; u < n; ++u) {
    if (pos[u] >= 0) continue;
    std::size_t best = kept.front();
    for (const std::size_t h : kept) {
      if (attn(u, h) > attn(u, best)) best = h;
    }
    assignment[u] = best;
  }
  return assignment;
}

AggregatedEmbedding aggregate_features(const NodeEmbedding& emb, const IndexList& kept,
                                       const Matrix& attn) {
  const std::size_t n = emb.nodes();
  Assignment assignment = assign_to_hubs(n, kept, attn);
  const auto pos = kept_positions(n, kept);
  Matrix fused(static_cast<Eigen::Index>(kept.size()), emb.fused.cols());
  for (std::size_t k = 0; k < kept.size(); ++k) fused.row(static_cast<Eigen::Index>(k)) = emb.fused.row(static_cast<Eigen::Index>(kept[k]));
  for (const auto& [u, hub] : assignment) {
    fused.row(pos[hub]) += attn(u, hub) * emb.fused.row(static_cast<Eigen::Index>(u));
  }
  const Eigen::Index width = emb.balanced.cols();
  AggregatedEmbedding out;
  out.embedding = make_embedding(fused.leftCols(width), fused.rightCols(fused.cols() - width));
  out.assignment = std::move(assignment);
  return out;
}

PooledGraph pool_graph(const FunctionalNetwork& graph, const IndexList& kept) {
  check_kept(kept, graph.nodes());
  const auto k = static_cast<Eigen::Index>(kept.size());
  PooledGraph pooled;
  pooled.kept_indices = kept;
  pooled.network.adjacency.resize(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      pooled.network.adjacency(a, b) = graph.adjacency(static_cast<Eigen::Index>(kept[a]), static_cast<Eigen::Index>(kept[b]));
    }
  }
  if (graph.features.rows() == static_cast<Eigen::Index>(graph.nodes())) {
    pooled.network.features.resize(k, graph.features.cols());
    for (Eigen::Index a = 0; a < k; ++a) pooled.network.features.row(a) = graph.features.row(static_cast<Eigen::Index>(kept[a]));
  }
  for (const std::size_t idx : kept) {
    if (idx < graph.node_labels.size()) pooled.network.node_labels.push_back(graph.node_labels[idx]);
  }
  return pooled;
}

ad::Var aggregate_onto_hubs(const ad::Var& fused, const IndexList& kept, const Assignment& assignment) {
  const auto n = static_cast<std::size_t>(fused.rows());
  check_kept(kept, n);
  const auto pos = kept_positions(n, kept);
  const Matrix& x = fused.value();

  Matrix out(static_cast<Eigen::Index>(kept.size()), x.cols());
  for (std::size_t k = 0; k < kept.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(kept[k]));
  for (const auto& [u, hub] : assignment) {
    if (u >= n || pos[hub] < 0) throw Error(ErrorCode::IndexOutOfRange, "assignment refers to unknown node");
    const auto ui = static_cast<Eigen::Index>(u);
    const auto hi = static_cast<Eigen::Index>(hub);
    out.row(pos[hub]) += x.row(ui).dot(x.row(hi)) * x.row(ui);
  }

  ad::Tape& tape = *fused.tape();
  return tape.record(std::move(out), tape.needs_grad(fused),
                     [fused, kept, assignment, pos](ad::Tape& t, const Matrix& g) {
                       const Matrix& x = fused.value();
                       Matrix d = Matrix::Zero(x.rows(), x.cols());
                       for (std::size_t k = 0; k < kept.size(); ++k) d.row(static_cast<Eigen::Index>(kept[k])) += g.row(static_cast<Eigen::Index>(k));
                       // out_h += (x_u . x_h) x_u
                       for (const auto& [u, hub] : assignment) {
                         const auto ui = static_cast<Eigen::Index>(u);
                         const auto hi = static_cast<Eigen::Index>(hub);
                         const auto gh = g.row(pos[hub]);
                         const double weight = x.row(ui).dot(x.row(hi));
                         const double along = gh.dot(x.row(ui));
                         d.row(ui) += weight * gh + along * x.row(hi);
                         d.row(hi) += along * x.row(ui);
                       }
                       t.accumulate(fused, d);
                     });
}

}  // namespace hsgp
