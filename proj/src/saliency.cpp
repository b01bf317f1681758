#include "hsgp/saliency.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "hsgp/errors.hpp"
#include "json.hpp"

namespace hsgp {

std::string SaliencyTarget::describe() const {
  return class_index ? "class_" + std::to_string(*class_index) : "regression";
}

namespace {

Eigen::Index output_index(const ModelParams& params, const SaliencyTarget& target) {
  if (params.task.kind == TaskKind::Regression) {
    if (target.class_index) throw Error(ErrorCode::InvalidTarget, "regression maps take no class index");
    return 0;
  }
  if (!target.class_index || *target.class_index >= params.task.num_classes) {
    throw Error(ErrorCode::InvalidTarget, "classification maps need a class index below " +
                                              std::to_string(params.task.num_classes));
  }
  return static_cast<Eigen::Index>(*target.class_index);
}

}  // namespace

RowVector cam_channel_weights(const ModelParams& params, const RowVector& hat, const RowVector& check,
                              const SaliencyTarget& target, SaliencyBranch branch) {
  const Eigen::Index out = output_index(params, target);
  const HeadParams& head = params.head;
  if (hat.size() != check.size() || 2 * hat.size() != head.w1.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "embedding widths do not match the head");
  }
  RowVector input(hat.size() + check.size());
  input << hat, check;
  const RowVector hidden = ((input * head.w1) + head.b1.row(0)).array().tanh().matrix();
  // d(target output)/d(pre-activation output); log-softmax for classification.
  Vector out_slope = Vector::Zero(head.w2.cols());
  out_slope[out] = 1.0;
  if (params.task.kind == TaskKind::Classification) {
    const RowVector logits = hidden * head.w2 + head.b2.row(0);
    const RowVector probs = (logits.array() - logits.maxCoeff()).exp().matrix();
    out_slope -= (probs / probs.sum()).transpose();
  }
  const Vector slope =
      (1.0 - hidden.array().square()).matrix().transpose().cwiseProduct(head.w2 * out_slope);
  const Vector full = head.w1 * slope;
  const Eigen::Index width = hat.size();
  return (branch == SaliencyBranch::Hat ? full.head(width) : full.tail(width)).transpose();
}

Vector cam_from_weights(const Matrix& final_nodes, const RowVector& weights) {
  if (final_nodes.cols() != weights.size()) throw Error(ErrorCode::ShapeMismatch, "channel count differs");
  return final_nodes * weights.transpose();
}

CamScores cam_final_scores(const ModelParams& params, const ContrastivePair& sample,
                           const SaliencyTarget& target, const PoolConfig& pool, SaliencyBranch branch) {
  output_index(params, target);
  const GraphEmbedding hat = forward_embed(params, sample.hat_network, pool);
  const GraphEmbedding check = forward_embed(params, sample.check_network, pool);
  const RowVector weights = cam_channel_weights(params, hat.vector, check.vector, target, branch);
  const GraphEmbedding& explained = branch == SaliencyBranch::Hat ? hat : check;
  return CamScores{cam_from_weights(explained.final_nodes, weights), explained.layers};
}

IndexList trace_to_final(const std::vector<LayerRecord>& chain) {
  if (chain.empty()) throw Error(ErrorCode::InconsistentChain, "empty pooling chain");
  IndexList position(chain.front().nodes_before);
  std::iota(position.begin(), position.end(), 0);
  std::size_t width = chain.front().nodes_before;
  for (const LayerRecord& layer : chain) {
    if (layer.nodes_before != width) throw Error(ErrorCode::InconsistentChain, "layer sizes do not chain");
    std::vector<long> next(width, -1);
    for (std::size_t k = 0; k < layer.kept_indices.size(); ++k) {
      if (layer.kept_indices[k] >= width) throw Error(ErrorCode::InconsistentChain, "kept index out of range");
      next[layer.kept_indices[k]] = static_cast<long>(k);
    }
    for (const auto& [dropped, hub] : layer.assignment) {
      if (dropped >= width || hub >= width || next[hub] < 0 || next[dropped] >= 0) {
        throw Error(ErrorCode::InconsistentChain, "assignment does not match kept set");
      }
    }
    for (auto& p : position) {
      const auto it = layer.assignment.find(p);
      const std::size_t via = it == layer.assignment.end() ? p : it->second;
      if (next[via] < 0) throw Error(ErrorCode::InconsistentChain, "node has neither hub nor slot");
      p = static_cast<std::size_t>(next[via]);
    }
    width = layer.kept_indices.size();
  }
  return position;
}

Vector min_max_normalize(const Vector& scores) {
  if (scores.size() == 0) return scores;
  const double lo = scores.minCoeff();
  const double hi = scores.maxCoeff();
  if (!(hi > lo)) return Vector::Zero(scores.size());
  return ((scores.array() - lo) / (hi - lo)).matrix();
}

SaliencyMap unpool_saliency(const Vector& final_scores, const std::vector<LayerRecord>& chain,
                            const std::string& target) {
  if (static_cast<std::size_t>(final_scores.size()) != chain.back().kept_indices.size()) {
    throw Error(ErrorCode::InconsistentChain, "final score count differs from last pooled size");
  }
  const IndexList final_index = trace_to_final(chain);
  SaliencyMap map;
  map.target = target;
  map.scores.resize(static_cast<Eigen::Index>(final_index.size()));
  for (std::size_t i = 0; i < final_index.size(); ++i) {
    map.scores[static_cast<Eigen::Index>(i)] = final_scores[static_cast<Eigen::Index>(final_index[i])];
  }
  map.normalized = min_max_normalize(map.scores);
  return map;
}

std::vector<std::pair<std::string, double>> top_regions(const SaliencyMap& map,
                                                        const std::vector<std::string>& labels,
                                                        std::size_t k) {
  const auto n = static_cast<std::size_t>(map.normalized.size());
  if (k < 1 || k > n) throw Error(ErrorCode::KOutOfRange, "k outside [1, N]");
  if (labels.size() != n) throw Error(ErrorCode::ShapeMismatch, "label count differs from map length");
  IndexList order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return map.normalized[static_cast<Eigen::Index>(a)] > map.normalized[static_cast<Eigen::Index>(b)];
  });
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t r = 0; r < k; ++r) {
    out.emplace_back(labels[order[r]], map.normalized[static_cast<Eigen::Index>(order[r])]);
  }
  return out;
}

SaliencyMap average_maps(const std::vector<SaliencyMap>& maps) {
  if (maps.empty()) throw Error(ErrorCode::EmptyDataset, "no saliency maps to average");
  SaliencyMap avg;
  avg.target = maps.front().target;
  avg.scores = Vector::Zero(maps.front().scores.size());
  avg.normalized = Vector::Zero(maps.front().normalized.size());
  for (const auto& m : maps) {
    if (m.scores.size() != avg.scores.size()) throw Error(ErrorCode::ShapeMismatch, "maps differ in length");
    avg.scores += m.scores;
    avg.normalized += m.normalized;
  }
  avg.scores /= static_cast<double>(maps.size());
  avg.normalized /= static_cast<double>(maps.size());
  return avg;
}

SaliencyMap sample_saliency(const ModelParams& params, const ContrastivePair& sample,
                            const SaliencyTarget& target, const PoolConfig& pool, SaliencyBranch branch) {
  const CamScores cam = cam_final_scores(params, sample, target, pool, branch);
  return unpool_saliency(cam.final_scores, cam.chain, target.describe());
}

void write_saliency_csv(const SaliencyMap& map, const std::vector<std::string>& labels,
                        const std::filesystem::path& path) {
  if (labels.size() != static_cast<std::size_t>(map.scores.size())) {
    throw Error(ErrorCode::ShapeMismatch, "label count differs from map length");
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  out << "node_label,raw_score,normalized_score\n" << std::setprecision(17);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out << labels[i] << ',' << map.scores[ii] << ',' << map.normalized[ii] << '\n';
  }
}

void write_saliency_summary(const SaliencyMap& map, const std::vector<std::string>& labels, std::size_t k,
                            const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["target"] = map.target;
  nlohmann::json top = nlohmann::json::array();
  for (const auto& [label, score] : top_regions(map, labels, std::min<std::size_t>(k, labels.size()))) {
    top.push_back({{"node_label", label}, {"score", score}});
  }
  doc["top_k"] = std::move(top);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace hsgp
