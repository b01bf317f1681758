#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hsgp/augmentation.hpp"
#include "hsgp/bue_layer.hpp"
#include "hsgp/hgp_layer.hpp"

namespace hsgp {

enum class TaskKind { Classification, Regression };

struct TaskSpec {
  TaskKind kind = TaskKind::Classification;
  std::size_t num_classes = 2;

  std::size_t output_dim() const { return kind == TaskKind::Classification ? num_classes : 1; }
  static TaskSpec classification(std::size_t classes) { return {TaskKind::Classification, classes}; }
  static TaskSpec regression() { return {TaskKind::Regression, 0}; }
};

std::string to_string(TaskKind kind);
TaskKind parse_task(const std::string& name);

struct ModelDims {
  Eigen::Index feature_width = 2;
  Eigen::Index hidden = 16;
  Eigen::Index head_hidden = 64;
  std::size_t layers = 3;

  Eigen::Index embedding_width() const { return 2 * hidden; }
};

/// Two affine layers with a tanh hidden activation.
struct HeadParams {
  Matrix w1;  // 2 * embedding_width x head_hidden
  Matrix b1;  // 1 x head_hidden
  Matrix w2;  // head_hidden x output_dim
  Matrix b2;  // 1 x output_dim
};

/// All learnable tensors. The flat view concatenates tensors in the order of
/// tensors(), each in column-major order.
struct ModelParams {
  std::vector<BueParams> bue_layers;
  HeadParams head;
  TaskSpec task;

  static ModelParams zeros(const ModelDims& dims, const TaskSpec& task);
  static ModelParams random(const ModelDims& dims, const TaskSpec& task, std::uint64_t seed);

  ModelDims dims() const;
  std::vector<std::pair<std::string, Matrix*>> tensors();
  std::vector<std::pair<std::string, const Matrix*>> tensors() const;
  std::vector<std::string> tensor_names() const;

  std::size_t parameter_count() const;
  Vector flatten() const;
  void assign(const Vector& flat);
  void validate() const;
};

/// One pooling step as applied by the model.
struct LayerRecord {
  std::size_t nodes_before = 0;
  IndexList kept_indices;
  Assignment assignment;
};

/// Readout (sum of final fused node rows) plus the pooling trace.
struct GraphEmbedding {
  RowVector vector;
  Matrix final_nodes;  // fused embedding of the last pooled graph
  std::vector<LayerRecord> layers;
};

/// Parameters bound onto a tape.
struct ModelVars {
  std::vector<BueVars> layers;
  ad::Var w1, b1, w2, b2;
};

ModelVars bind(ad::Tape& tape, const ModelParams& params, bool trainable);

struct EmbedVars {
  ad::Var readout;      // 1 x embedding width
  ad::Var final_nodes;  // K_final x embedding width
  std::vector<LayerRecord> layers;
};

EmbedVars embed_on_tape(const ModelVars& vars, const FunctionalNetwork& graph, const PoolConfig& cfg);

GraphEmbedding forward_embed(const ModelParams& params, const FunctionalNetwork& graph,
                             const PoolConfig& cfg);

/// Head output for stacked inputs [hat | check] (M x 2 * embedding width):
/// log-probabilities for classification, a single column for regression.
ad::Var head_on_tape(const ModelVars& vars, const TaskSpec& task, const ad::Var& inputs);

Vector predict(const ModelParams& params, const RowVector& hat, const RowVector& check);

/// Contrastive objective over cosine similarities S(m, t) = cos(hat_m, check_t):
/// mean over m of -S(m,m)/alpha + log sum_{t != m} exp(S(m,t)/alpha).
/// The positive pair is not part of the denominator, so the value can be
/// negative. `symmetric` averages with the check-anchored version.
ad::Var ntxent_on_tape(const ad::Var& hats, const ad::Var& checks, double temperature, bool symmetric);
double ntxent_batch(const Matrix& hats, const Matrix& checks, double temperature, bool symmetric = false);

/// Mean NLL of the target class (targets hold class indices).
ad::Var nll_on_tape(const ad::Var& log_probs, const std::vector<double>& targets);
/// Mean absolute error of a single-column prediction.
ad::Var l1_on_tape(const ad::Var& preds, const std::vector<double>& targets);

double supervised_loss(const Vector& pred, double target, const TaskSpec& task);
double total_loss(double supervised, double contrastive, double mu1, double mu2);

struct LabeledPair {
  ContrastivePair pair;
  double target = 0.0;
};

struct ObjectiveConfig {
  double mu1 = 1.0;
  double mu2 = 0.1;
  double temperature = 0.2;
  bool symmetric_contrastive = false;
  PoolConfig pool;
};

struct BatchObjective {
  double loss = 0.0;
  double supervised = 0.0;
  double contrastive = 0.0;
  Matrix outputs;    // M x output_dim head outputs
  Vector gradient;   // flat, empty unless requested
};

/// mu1 * supervised + mu2 * contrastive over the batch. Discrete pooling
/// choices are fixed by the forward pass; the gradient is exact for the
/// remaining continuous computation. The contrastive term is skipped when
/// mu2 == 0.
BatchObjective batch_objective(const ModelParams& params, std::span<const LabeledPair* const> batch,
                               const ObjectiveConfig& cfg, bool with_gradient);

Vector gradients(const ModelParams& params, std::span<const LabeledPair* const> batch,
                 const ObjectiveConfig& cfg);

}  // namespace hsgp
