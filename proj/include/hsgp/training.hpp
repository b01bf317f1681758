#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "hsgp/model.hpp"
#include "hsgp/optim.hpp"

namespace hsgp {

struct TrainingConfig {
  std::size_t batch_size = 16;
  double temperature = 0.2;
  double mu1 = 1.0;
  double mu2 = 0.1;
  double base_lr = 1e-4;
  double weight_decay = 1e-5;
  std::size_t max_epochs = 1000;
  std::size_t patience = 50;
  std::uint64_t seed = 0;
  bool symmetric_contrastive = false;

  /// Loss weights used for the given task when none are set explicitly.
  static TrainingConfig defaults_for(TaskKind task);
  void validate() const;
  ObjectiveConfig objective(const PoolConfig& pool) const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  ModelParams params;  // best-validation checkpoint
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
};

/// Called after every epoch with the epoch's record and end-of-epoch parameters.
using EpochObserver = std::function<void(const EpochRecord&, const ModelParams&)>;

/// Mini-batch Adam with seeded shuffling, the polynomial lr decay and early
/// stopping on validation loss. Short trailing batches are dropped; a
/// training set smaller than one batch is used as a single batch.
TrainResult train(const std::vector<LabeledPair>& train_set, const std::vector<LabeledPair>& val_set,
                  ModelParams params, const TrainingConfig& cfg, const PoolConfig& pool,
                  const EpochObserver& observer = {});

/// Objective over the whole set as one batch (contrastive term only when
/// the set has at least two pairs).
double dataset_loss(const ModelParams& params, const std::vector<LabeledPair>& data,
                    const TrainingConfig& cfg, const PoolConfig& pool);

struct Metrics {
  TaskKind task = TaskKind::Classification;
  std::size_t count = 0;
  double accuracy = 0.0;
  double precision = 0.0;  // binary: class 1; multiclass: macro average
  double recall = 0.0;
  double f1 = 0.0;         // binary F1 or macro-F1
  double mae = 0.0;
};

Metrics classification_metrics(const std::vector<std::size_t>& predicted,
                               const std::vector<std::size_t>& truth, std::size_t num_classes);
Metrics regression_metrics(const std::vector<double>& predicted, const std::vector<double>& truth);

/// Head outputs for each pair (log-probabilities or a single regression value).
std::vector<Vector> predict_dataset(const ModelParams& params, const std::vector<LabeledPair>& data,
                                    const PoolConfig& pool);

Metrics evaluate(const ModelParams& params, const std::vector<LabeledPair>& data, const PoolConfig& pool);

/// k disjoint folds covering 0..n-1, sizes differing by at most one; each
/// fold sorted ascending.
std::vector<IndexList> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path);
std::vector<EpochRecord> read_history_csv(const std::filesystem::path& path);

}  // namespace hsgp
