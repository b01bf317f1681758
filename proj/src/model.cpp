#include "hsgp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hsgp/errors.hpp"

namespace hsgp {
namespace {

Matrix uniform(Eigen::Index rows, Eigen::Index cols, double fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(fan_in);
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = dist(rng);
  return m;
}

std::size_t class_index(double target, std::size_t classes) {
  const double rounded = std::round(target);
  if (!std::isfinite(target) || rounded != target || rounded < 0.0 ||
      rounded >= static_cast<double>(classes)) {
    throw Error(ErrorCode::LabelOutOfRange, "class label " + std::to_string(target) + " outside [0, " +
                                                std::to_string(classes) + ")");
  }
  return static_cast<std::size_t>(rounded);
}

// mean over rows m of -S(m,m) + log sum_{t != m} exp S(m,t)
ad::Var contrastive_rows(const ad::Var& sim) {
  const Matrix& s = sim.value();
  const Eigen::Index m = s.rows();
  Matrix weights = Matrix::Zero(m, m);  // softmax over off-diagonal entries
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    double peak = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < m; ++t) {
      if (t != i) peak = std::max(peak, s(i, t));
    }
    double denom = 0.0;
    for (Eigen::Index t = 0; t < m; ++t) {
      if (t == i) continue;
      weights(i, t) = std::exp(s(i, t) - peak);
      denom += weights(i, t);
    }
    weights.row(i) /= denom;
    total += -s(i, i) + peak + std::log(denom);
  }
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(m);
  ad::Tape& tape = *sim.tape();
  return tape.record(std::move(out), tape.needs_grad(sim), [sim, weights, m](ad::Tape& t, const Matrix& g) {
    Matrix d = weights;
    d.diagonal().array() -= 1.0;
    t.accumulate(sim, d * (g(0, 0) / static_cast<double>(m)));
  });
}

}  // namespace

std::string to_string(TaskKind kind) {
  return kind == TaskKind::Classification ? "classification" : "regression";
}

TaskKind parse_task(const std::string& name) {
  if (name == "classification") return TaskKind::Classification;
  if (name == "regression") return TaskKind::Regression;
  throw Error(ErrorCode::ConfigError, "unknown task '" + name + "'");
}

ModelParams ModelParams::zeros(const ModelDims& dims, const TaskSpec& task) {
  ModelParams p;
  p.task = task;
  for (std::size_t l = 0; l < dims.layers; ++l) {
    p.bue_layers.push_back(BueParams::zeros(l == 0 ? dims.feature_width : dims.hidden, dims.hidden));
  }
  const auto out = static_cast<Eigen::Index>(task.output_dim());
  p.head.w1 = Matrix::Zero(2 * dims.embedding_width(), dims.head_hidden);
  p.head.b1 = Matrix::Zero(1, dims.head_hidden);
  p.head.w2 = Matrix::Zero(dims.head_hidden, out);
  p.head.b2 = Matrix::Zero(1, out);
  return p;
}

ModelParams ModelParams::random(const ModelDims& dims, const TaskSpec& task, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelParams p;
  p.task = task;
  for (std::size_t l = 0; l < dims.layers; ++l) {
    p.bue_layers.push_back(BueParams::random(l == 0 ? dims.feature_width : dims.hidden, dims.hidden, rng));
  }
  const auto out = static_cast<Eigen::Index>(task.output_dim());
  const auto in = 2 * dims.embedding_width();
  p.head.w1 = uniform(in, dims.head_hidden, static_cast<double>(in), rng);
  p.head.b1 = uniform(1, dims.head_hidden, static_cast<double>(in), rng);
  p.head.w2 = uniform(dims.head_hidden, out, static_cast<double>(dims.head_hidden), rng);
  p.head.b2 = uniform(1, out, static_cast<double>(dims.head_hidden), rng);
  return p;
}

ModelDims ModelParams::dims() const {
  ModelDims d;
  d.layers = bue_layers.size();
  if (!bue_layers.empty()) {
    d.feature_width = bue_layers.front().input_width();
    d.hidden = bue_layers.front().hidden_width();
  }
  d.head_hidden = head.w1.cols();
  return d;
}

std::vector<std::pair<std::string, Matrix*>> ModelParams::tensors() {
  std::vector<std::pair<std::string, Matrix*>> out;
  for (std::size_t l = 0; l < bue_layers.size(); ++l) {
    for (auto& [name, m] : bue_layers[l].tensors()) out.emplace_back("bue." + std::to_string(l) + "." + name, m);
  }
  out.emplace_back("head.w1", &head.w1);
  out.emplace_back("head.b1", &head.b1);
  out.emplace_back("head.w2", &head.w2);
  out.emplace_back("head.b2", &head.b2);
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> ModelParams::tensors() const {
  std::vector<std::pair<std::string, const Matrix*>> out;
  for (auto& [name, m] : const_cast<ModelParams*>(this)->tensors()) out.emplace_back(name, m);
  return out;
}

std::vector<std::string> ModelParams::tensor_names() const {
  std::vector<std::string> names;
  for (const auto& [name, m] : tensors()) names.push_back(name);
  return names;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t count = 0;
  for (const auto& [name, m] : tensors()) count += static_cast<std::size_t>(m->size());
  return count;
}

Vector ModelParams::flatten() const {
  Vector flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index offset = 0;
  for (const auto& [name, m] : tensors()) {
    flat.segment(offset, m->size()) = Eigen::Map<const Vector>(m->data(), m->size());
    offset += m->size();
  }
  return flat;
}

void ModelParams::assign(const Vector& flat) {
  if (flat.size() != static_cast<Eigen::Index>(parameter_count())) {
    throw Error(ErrorCode::ShapeMismatch, "flat parameter vector has the wrong length");
  }
  Eigen::Index offset = 0;
  for (auto& [name, m] : tensors()) {
    Eigen::Map<Vector>(m->data(), m->size()) = flat.segment(offset, m->size());
    offset += m->size();
  }
}

void ModelParams::validate() const {
  if (bue_layers.empty()) throw Error(ErrorCode::ShapeMismatch, "model has no BUE layers");
  for (std::size_t l = 0; l < bue_layers.size(); ++l) {
    bue_layers[l].validate();
    if (l > 0 && bue_layers[l].input_width() != bue_layers[l - 1].hidden_width()) {
      throw Error(ErrorCode::ShapeMismatch, "BUE layer widths do not chain");
    }
  }
  const Eigen::Index width = 2 * bue_layers.back().hidden_width();
  const auto out = static_cast<Eigen::Index>(task.output_dim());
  if (head.w1.rows() != 2 * width || head.b1.rows() != 1 || head.b1.cols() != head.w1.cols() ||
      head.w2.rows() != head.w1.cols() || head.w2.cols() != out || head.b2.rows() != 1 ||
      head.b2.cols() != out) {
    throw Error(ErrorCode::ShapeMismatch, "head parameter shapes do not match the task");
  }
  for (const auto& [name, m] : tensors()) {
    if (!m->allFinite()) throw Error(ErrorCode::NonFiniteParams, "non-finite parameter " + name);
  }
}

ModelVars bind(ad::Tape& tape, const ModelParams& params, bool trainable) {
  ModelVars vars;
  for (const auto& layer : params.bue_layers) vars.layers.push_back(bind(tape, layer, trainable));
  auto leaf = [&](const Matrix& m) { return trainable ? tape.variable(m) : tape.constant(m); };
  vars.w1 = leaf(params.head.w1);
  vars.b1 = leaf(params.head.b1);
  vars.w2 = leaf(params.head.w2);
  vars.b2 = leaf(params.head.b2);
  return vars;
}

EmbedVars embed_on_tape(const ModelVars& vars, const FunctionalNetwork& graph, const PoolConfig& cfg) {
  cfg.validate();
  if (vars.layers.size() != cfg.layers) {
    throw Error(ErrorCode::ShapeMismatch, "pool config layer count differs from model depth");
  }
  if (graph.features.rows() != graph.adjacency.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "feature rows do not match adjacency");
  }
  ad::Tape& tape = *vars.w1.tape();
  const ad::Var features = tape.constant(graph.features);
  StreamVars streams{features, features};
  Matrix adjacency = graph.adjacency;

  EmbedVars out;
  ad::Var pooled;
  for (const auto& layer : vars.layers) {
    const NormalizedAdjacency norm = normalize_signed(adjacency);
    streams = bue_forward(layer, norm, streams);
    const NodeEmbedding emb = make_embedding(streams.balanced.value(), streams.unbalanced.value());

    const std::size_t n = emb.nodes();
    LayerRecord record;
    record.nodes_before = n;
    record.kept_indices = select_topk(information_scores(norm, emb), cfg.keep_count(n));
    record.assignment = assign_to_hubs(n, record.kept_indices, feature_attention(emb));

    const Eigen::Index width = emb.balanced.cols();
    pooled = aggregate_onto_hubs(ad::concat_cols(streams.balanced, streams.unbalanced),
                                 record.kept_indices, record.assignment);
    streams = StreamVars{ad::slice_cols(pooled, 0, width), ad::slice_cols(pooled, width, width)};

    const auto k = static_cast<Eigen::Index>(record.kept_indices.size());
    Matrix next(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) {
        next(a, b) = adjacency(static_cast<Eigen::Index>(record.kept_indices[a]),
                               static_cast<Eigen::Index>(record.kept_indices[b]));
      }
    }
    adjacency = std::move(next);
    out.layers.push_back(std::move(record));
  }
  out.final_nodes = pooled;
  out.readout = ad::sum_rows(pooled);
  return out;
}

GraphEmbedding forward_embed(const ModelParams& params, const FunctionalNetwork& graph,
                             const PoolConfig& cfg) {
  params.validate();
  ad::Tape tape;
  const ModelVars vars = bind(tape, params, false);
  EmbedVars ev = embed_on_tape(vars, graph, cfg);
  return GraphEmbedding{ev.readout.value().row(0), ev.final_nodes.value(), std::move(ev.layers)};
}

ad::Var head_on_tape(const ModelVars& vars, const TaskSpec& task, const ad::Var& inputs) {
  if (inputs.cols() != vars.w1.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "head input width does not match parameters");
  }
  const ad::Var hidden = ad::tanh(ad::add_row(ad::matmul(inputs, vars.w1), vars.b1));
  const ad::Var out = ad::add_row(ad::matmul(hidden, vars.w2), vars.b2);
  return task.kind == TaskKind::Classification ? ad::log_softmax_rows(out) : out;
}

Vector predict(const ModelParams& params, const RowVector& hat, const RowVector& check) {
  params.validate();
  if (hat.size() != check.size() || 2 * hat.size() != params.head.w1.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "embedding widths do not match the head");
  }
  ad::Tape tape;
  const ModelVars vars = bind(tape, params, false);
  Matrix input(1, hat.size() + check.size());
  input << hat, check;
  return head_on_tape(vars, params.task, tape.constant(input)).value().row(0).transpose();
}

ad::Var ntxent_on_tape(const ad::Var& hats, const ad::Var& checks, double temperature, bool symmetric) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::ConfigError, "temperature must be positive");
  if (hats.rows() != checks.rows() || hats.cols() != checks.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "hat and check batches differ in shape");
  }
  if (hats.rows() < 2) throw Error(ErrorCode::BatchTooSmall, "contrastive loss needs at least 2 pairs");
  const ad::Var sim = ad::scale(
      ad::matmul(ad::normalize_rows(hats), ad::transpose(ad::normalize_rows(checks))), 1.0 / temperature);
  const ad::Var anchored = contrastive_rows(sim);
  if (!symmetric) return anchored;
  return ad::scale(ad::add(anchored, contrastive_rows(ad::transpose(sim))), 0.5);
}

double ntxent_batch(const Matrix& hats, const Matrix& checks, double temperature, bool symmetric) {
  ad::Tape tape;
  return ntxent_on_tape(tape.constant(hats), tape.constant(checks), temperature, symmetric).scalar();
}

ad::Var nll_on_tape(const ad::Var& log_probs, const std::vector<double>& targets) {
  const Matrix& lp = log_probs.value();
  if (static_cast<std::size_t>(lp.rows()) != targets.size() || targets.empty()) {
    throw Error(ErrorCode::ShapeMismatch, "prediction and target counts differ");
  }
  const auto classes = static_cast<std::size_t>(lp.cols());
  std::vector<Eigen::Index> labels;
  for (const double t : targets) labels.push_back(static_cast<Eigen::Index>(class_index(t, classes)));
  const double m = static_cast<double>(targets.size());
  Matrix out(1, 1);
  out(0, 0) = 0.0;
  for (Eigen::Index i = 0; i < lp.rows(); ++i) out(0, 0) -= lp(i, labels[static_cast<std::size_t>(i)]);
  out(0, 0) /= m;
  ad::Tape& tape = *log_probs.tape();
  return tape.record(std::move(out), tape.needs_grad(log_probs), [log_probs, labels, m](ad::Tape& t, const Matrix& g) {
    Matrix d = Matrix::Zero(log_probs.rows(), log_probs.cols());
    for (Eigen::Index i = 0; i < d.rows(); ++i) d(i, labels[static_cast<std::size_t>(i)]) = -g(0, 0) / m;
    t.accumulate(log_probs, d);
  });
}

ad::Var l1_on_tape(const ad::Var& preds, const std::vector<double>& targets) {
  const Matrix& p = preds.value();
  if (p.cols() != 1 || static_cast<std::size_t>(p.rows()) != targets.size() || targets.empty()) {
    throw Error(ErrorCode::ShapeMismatch, "prediction and target counts differ");
  }
  const double m = static_cast<double>(targets.size());
  Matrix sign(p.rows(), 1);
  Matrix out(1, 1);
  out(0, 0) = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double diff = p(i, 0) - targets[static_cast<std::size_t>(i)];
    out(0, 0) += std::abs(diff);
    sign(i, 0) = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
  }
  out(0, 0) /= m;
  ad::Tape& tape = *preds.tape();
  return tape.record(std::move(out), tape.needs_grad(preds), [preds, sign, m](ad::Tape& t, const Matrix& g) {
    t.accumulate(preds, sign * (g(0, 0) / m));
  });
}

double supervised_loss(const Vector& pred, double target, const TaskSpec& task) {
  if (static_cast<std::size_t>(pred.size()) != task.output_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "prediction width does not match the task");
  }
  if (task.kind == TaskKind::Classification) {
    return -pred[static_cast<Eigen::Index>(class_index(target, task.num_classes))];
  }
  return std::abs(pred[0] - target);
}

double total_loss(double supervised, double contrastive, double mu1, double mu2) {
  return mu1 * supervised + mu2 * contrastive;
}

BatchObjective batch_objective(const ModelParams& params, std::span<const LabeledPair* const> batch,
                               const ObjectiveConfig& cfg, bool with_gradient) {
  if (batch.empty()) throw Error(ErrorCode::EmptyDataset, "empty batch");
  params.validate();
  ad::Tape tape;
  const ModelVars vars = bind(tape, params, with_gradient);

  const auto m = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index width = 2 * params.bue_layers.back().hidden_width();
  std::vector<ad::Var> hat_rows;
  std::vector<ad::Var> check_rows;
  std::vector<double> targets;
  for (const LabeledPair* sample : batch) {
    hat_rows.push_back(embed_on_tape(vars, sample->pair.hat_network, cfg.pool).readout);
    check_rows.push_back(embed_on_tape(vars, sample->pair.check_network, cfg.pool).readout);
    targets.push_back(sample->target);
  }

  // Stack rows into M x width matrices through a single recorded op each.
  auto stack = [&](const std::vector<ad::Var>& rows) {
    Matrix value(m, width);
    bool needs = false;
    for (Eigen::Index i = 0; i < m; ++i) {
      value.row(i) = rows[static_cast<std::size_t>(i)].value().row(0);
      needs = needs || tape.needs_grad(rows[static_cast<std::size_t>(i)]);
    }
    return tape.record(std::move(value), needs, [rows](ad::Tape& t, const Matrix& g) {
      for (std::size_t i = 0; i < rows.size(); ++i) t.accumulate(rows[i], g.row(static_cast<Eigen::Index>(i)));
    });
  };
  const ad::Var hats = stack(hat_rows);
  const ad::Var checks = stack(check_rows);

  const ad::Var outputs = head_on_tape(vars, params.task, ad::concat_cols(hats, checks));
  const ad::Var sup = params.task.kind == TaskKind::Classification ? nll_on_tape(outputs, targets)
                                                                   : l1_on_tape(outputs, targets);
  ad::Var loss = ad::scale(sup, cfg.mu1);

  BatchObjective result;
  result.supervised = sup.scalar();
  if (cfg.mu2 != 0.0) {
    const ad::Var contra = ntxent_on_tape(hats, checks, cfg.temperature, cfg.symmetric_contrastive);
    result.contrastive = contra.scalar();
    loss = ad::add(loss, ad::scale(contra, cfg.mu2));
  }
  result.loss = loss.scalar();
  result.outputs = outputs.value();

  if (with_gradient) {
    tape.backward(loss);
    result.gradient.resize(static_cast<Eigen::Index>(params.parameter_count()));
    Eigen::Index offset = 0;
    auto put = [&](const ad::Var& v) {
      const Matrix g = tape.grad(v);
      result.gradient.segment(offset, g.size()) = Eigen::Map<const Vector>(g.data(), g.size());
      offset += g.size();
    };
    for (const auto& layer : vars.layers) {
      for (const ad::Var* v : {&layer.w_balanced_in, &layer.w_unbalanced_in, &layer.attn_vec_pos,
                               &layer.attn_vec_neg, &layer.mix_pos_balanced, &layer.mix_neg_balanced,
                               &layer.mix_pos_unbalanced, &layer.mix_neg_unbalanced}) {
        put(*v);
      }
    }
    for (const ad::Var* v : {&vars.w1, &vars.b1, &vars.w2, &vars.b2}) put(*v);
    if (!result.gradient.allFinite()) throw Error(ErrorCode::NonFiniteGradient, "gradient has non-finite entries");
  }
  return result;
}

Vector gradients(const ModelParams& params, std::span<const LabeledPair* const> batch,
                 const ObjectiveConfig& cfg) {
  return batch_objective(params, batch, cfg, true).gradient;
}

}  // namespace hsgp
