#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hsgp/augmentation.hpp"
#include "hsgp/dataset.hpp"
#include "hsgp/model.hpp"
#include "hsgp/saliency.hpp"
#include "hsgp/training.hpp"

namespace hsgp {

/// Everything a CLI run needs. Serialized as one flat JSON object whose keys
/// are listed by run_config_keys(); unknown keys are rejected.
struct RunConfig {
  TaskSpec task = TaskSpec::classification(2);
  std::filesystem::path data_dir = "data";
  std::filesystem::path output_dir = "out";
  std::filesystem::path checkpoint;  // empty: <output_dir>/checkpoint.json
  std::size_t folds = 5;
  std::size_t fold = 0;  // validation fold

  AugmentConfig augment;
  PoolConfig pool;
  TrainingConfig training;
  ModelDims dims;
  SyntheticSpec synth;  // synth.n_classes follows task.num_classes, synth.seed follows training.seed

  SimilarityMetric metric = SimilarityMetric::Cosine;
  std::size_t saliency_class = 1;
  std::size_t top_k = 10;

  void validate() const;
  std::filesystem::path checkpoint_path() const;
};

std::vector<std::string> run_config_keys();

/// Parses a config document. Keys that are absent keep their defaults;
/// mu1/mu2 default per task.
RunConfig parse_run_config(const std::string& json_text);
std::string dump_run_config(const RunConfig& cfg);

/// Config file (optional) plus "key=value" style overrides; overrides win.
/// Override values are typed by the key they replace.
RunConfig resolve_run_config(const std::optional<std::filesystem::path>& config_file,
                             const std::vector<std::pair<std::string, std::string>>& overrides);

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path);

enum class Command { Synth, Augment, Train, Eval, Saliency, Sweep };

Command parse_command(const std::string& name);
std::string to_string(Command command);

/// Options that only make sense for one command.
struct CommandOptions {
  std::optional<std::filesystem::path> report;  // augment
  std::string sweep_param;                      // sweep: window_size, mu1, mu2 or ratio
  std::vector<double> sweep_values;
};

/// Train/validation split of a dataset for cfg.fold.
struct FoldSplit {
  std::vector<LabeledPair> train;
  std::vector<LabeledPair> validation;
};

FoldSplit split_for_fold(const std::vector<Subject>& subjects, const RunConfig& cfg);

void write_metrics_json(const Metrics& metrics, double val_loss, const std::filesystem::path& path);

SyntheticDataset run_synth(const RunConfig& cfg);
PairSimilarity run_augment(const RunConfig& cfg, const std::optional<std::filesystem::path>& report);
TrainResult run_train(const RunConfig& cfg);
Metrics run_eval(const RunConfig& cfg);
SaliencyMap run_saliency(const RunConfig& cfg);
/// Returns the number of grid rows written.
std::size_t run_sweep(const RunConfig& cfg, const std::string& param, const std::vector<double>& values);

/// Dispatches one command; writes the resolved config into the output
/// directory first.
void run_pipeline(Command command, const RunConfig& cfg, const CommandOptions& options = {});

}  // namespace hsgp
