#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hsgp/model.hpp"

namespace hsgp {

/// Output the map explains: a class index, or the single regression output.
struct SaliencyTarget {
  std::optional<std::size_t> class_index;

  std::string describe() const;
};

enum class SaliencyBranch { Hat, Check };

struct SaliencyMap {
  Vector scores;      // one raw score per original node
  Vector normalized;  // min-max scaled to [0, 1], all zero for a flat map
  std::string target;
};

/// Head linearized at the sample: d(target output)/d(input channel) for the
/// channels of the chosen branch. Classification explains the target
/// log-probability.
RowVector cam_channel_weights(const ModelParams& params, const RowVector& hat, const RowVector& check,
                              const SaliencyTarget& target, SaliencyBranch branch = SaliencyBranch::Hat);

/// score_i = sum_c weights(c) * nodes(i, c)
Vector cam_from_weights(const Matrix& final_nodes, const RowVector& weights);

struct CamScores {
  Vector final_scores;
  std::vector<LayerRecord> chain;
};

CamScores cam_final_scores(const ModelParams& params, const ContrastivePair& sample,
                           const SaliencyTarget& target, const PoolConfig& pool,
                           SaliencyBranch branch = SaliencyBranch::Hat);

/// Index of the final pooled node each original node ends up in.
IndexList trace_to_final(const std::vector<LayerRecord>& chain);

SaliencyMap unpool_saliency(const Vector& final_scores, const std::vector<LayerRecord>& chain,
                            const std::string& target = {});

Vector min_max_normalize(const Vector& scores);

/// k best (label, normalized score) pairs, descending, ties to smaller index.
std::vector<std::pair<std::string, double>> top_regions(const SaliencyMap& map,
                                                        const std::vector<std::string>& labels,
                                                        std::size_t k);

/// Mean of per-sample normalized maps; raw scores averaged alongside.
SaliencyMap average_maps(const std::vector<SaliencyMap>& maps);

SaliencyMap sample_saliency(const ModelParams& params, const ContrastivePair& sample,
                            const SaliencyTarget& target, const PoolConfig& pool,
                            SaliencyBranch branch = SaliencyBranch::Hat);

void write_saliency_csv(const SaliencyMap& map, const std::vector<std::string>& labels,
                        const std::filesystem::path& path);
void write_saliency_summary(const SaliencyMap& map, const std::vector<std::string>& labels, std::size_t k,
                            const std::filesystem::path& path);

}  // namespace hsgp
