#include "hsgp/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "hsgp/errors.hpp"

namespace hsgp {

TrainingConfig TrainingConfig::defaults_for(TaskKind task) {
  TrainingConfig cfg;
  if (task == TaskKind::Regression) {
    cfg.mu1 = 0.5;
    cfg.mu2 = 1.0;
  }
  return cfg;
}

void TrainingConfig::validate() const {
  if (!(temperature > 0.0)) throw Error(ErrorCode::ConfigError, "temperature must be positive");
  if (mu1 < 0.0 || mu2 < 0.0) throw Error(ErrorCode::ConfigError, "loss weights must be non-negative");
  if (batch_size == 0) throw Error(ErrorCode::ConfigError, "batch size must be positive");
  if (mu2 > 0.0 && batch_size < 2) {
    throw Error(ErrorCode::ConfigError, "contrastive loss needs a batch size of at least 2");
  }
  if (max_epochs == 0) throw Error(ErrorCode::ConfigError, "max_epochs must be positive");
  if (!(base_lr >= 0.0) || !(weight_decay >= 0.0)) {
    throw Error(ErrorCode::ConfigError, "learning rate and weight decay must be non-negative");
  }
}

ObjectiveConfig TrainingConfig::objective(const PoolConfig& pool) const {
  return ObjectiveConfig{mu1, mu2, temperature, symmetric_contrastive, pool};
}

namespace {

std::vector<const LabeledPair*> pointers(const std::vector<LabeledPair>& data) {
  std::vector<const LabeledPair*> out;
  out.reserve(data.size());
  for (const auto& d : data) out.push_back(&d);
  return out;
}

}  // namespace

double dataset_loss(const ModelParams& params, const std::vector<LabeledPair>& data,
                    const TrainingConfig& cfg, const PoolConfig& pool) {
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "empty dataset");
  ObjectiveConfig objective = cfg.objective(pool);
  if (data.size() < 2) objective.mu2 = 0.0;
  const auto ptrs = pointers(data);
  return batch_objective(params, ptrs, objective, false).loss;
}

TrainResult train(const std::vector<LabeledPair>& train_set, const std::vector<LabeledPair>& val_set,
                  ModelParams params, const TrainingConfig& cfg, const PoolConfig& pool,
                  const EpochObserver& observer) {
  if (train_set.empty()) throw Error(ErrorCode::EmptyDataset, "empty training set");
  if (val_set.empty()) throw Error(ErrorCode::EmptyDataset, "empty validation set");
  cfg.validate();
  pool.validate();
  params.validate();

  const ObjectiveConfig objective = cfg.objective(pool);
  std::mt19937_64 rng(cfg.seed);
  AdamState adam = AdamState::fresh(params.parameter_count());
  Vector flat = params.flatten();

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::min(cfg.batch_size, train_set.size());
  if (objective.mu2 > 0.0 && batch < 2) {
    throw Error(ErrorCode::BatchTooSmall, "contrastive training needs at least 2 training pairs");
  }

  TrainResult result;
  result.params = params;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double lr = lr_at_epoch(cfg.base_lr, epoch, cfg.max_epochs);
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    std::vector<const LabeledPair*> members;
    for (std::size_t start = 0; start + batch <= order.size(); start += batch) {
      members.clear();
      for (std::size_t k = start; k < start + batch; ++k) members.push_back(&train_set[order[k]]);
      const BatchObjective step = batch_objective(params, members, objective, true);
      adam_step(adam, flat, step.gradient, lr, cfg.weight_decay);
      params.assign(flat);
      loss_sum += step.loss;
      ++batches;
    }
    if (!flat.allFinite()) throw Error(ErrorCode::NonFiniteParams, "parameters diverged");

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(batches);
    record.val_loss = dataset_loss(params, val_set, cfg, pool);
    record.lr = lr;
    result.history.push_back(record);
    if (observer) observer(record, params);

    if (record.val_loss < result.best_val_loss) {
      result.best_val_loss = record.val_loss;
      result.best_epoch = epoch;
      result.params = params;
      stale = 0;
    } else if (++stale > cfg.patience) {
      break;
    }
  }
  return result;
}

Metrics classification_metrics(const std::vector<std::size_t>& predicted,
                               const std::vector<std::size_t>& truth, std::size_t num_classes) {
  if (predicted.empty()) throw Error(ErrorCode::EmptyDataset, "no predictions to score");
  if (predicted.size() != truth.size()) throw Error(ErrorCode::ShapeMismatch, "prediction/label counts differ");
  Metrics m;
  m.task = TaskKind::Classification;
  m.count = predicted.size();

  std::vector<double> tp(num_classes, 0.0), fp(num_classes, 0.0), fn(num_classes, 0.0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] >= num_classes || truth[i] >= num_classes) {
      throw Error(ErrorCode::LabelOutOfRange, "class index outside the task's classes");
    }
    if (predicted[i] == truth[i]) {
      ++correct;
      tp[truth[i]] += 1.0;
    } else {
      fp[predicted[i]] += 1.0;
      fn[truth[i]] += 1.0;
    }
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.count);

  auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  auto f1_of = [](double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; };
  if (num_classes == 2) {
    m.precision = ratio(tp[1], tp[1] + fp[1]);
    m.recall = ratio(tp[1], tp[1] + fn[1]);
    m.f1 = f1_of(m.precision, m.recall);
    return m;
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    const double p = ratio(tp[c], tp[c] + fp[c]);
    const double r = ratio(tp[c], tp[c] + fn[c]);
    m.precision += p;
    m.recall += r;
    m.f1 += f1_of(p, r);
  }
  const double k = static_cast<double>(num_classes);
  m.precision /= k;
  m.recall /= k;
  m.f1 /= k;
  return m;
}

Metrics regression_metrics(const std::vector<double>& predicted, const std::vector<double>& truth) {
  if (predicted.empty()) throw Error(ErrorCode::EmptyDataset, "no predictions to score");
  if (predicted.size() != truth.size()) throw Error(ErrorCode::ShapeMismatch, "prediction/target counts differ");
  Metrics m;
  m.task = TaskKind::Regression;
  m.count = predicted.size();
  for (std::size_t i = 0; i < predicted.size(); ++i) m.mae += std::abs(predicted[i] - truth[i]);
  m.mae /= static_cast<double>(m.count);
  return m;
}

std::vector<Vector> predict_dataset(const ModelParams& params, const std::vector<LabeledPair>& data,
                                    const PoolConfig& pool) {
  std::vector<Vector> out;
  out.reserve(data.size());
  for (const auto& sample : data) {
    const GraphEmbedding hat = forward_embed(params, sample.pair.hat_network, pool);
    const GraphEmbedding check = forward_embed(params, sample.pair.check_network, pool);
    out.push_back(predict(params, hat.vector, check.vector));
  }
  return out;
}

Metrics evaluate(const ModelParams& params, const std::vector<LabeledPair>& data, const PoolConfig& pool) {
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "empty evaluation set");
  const auto outputs = predict_dataset(params, data, pool);
  if (params.task.kind == TaskKind::Regression) {
    std::vector<double> predicted, truth;
    for (std::size_t i = 0; i < data.size(); ++i) {
      predicted.push_back(outputs[i][0]);
      truth.push_back(data[i].target);
    }
    return regression_metrics(predicted, truth);
  }
  std::vector<std::size_t> predicted, truth;
  for (std::size_t i = 0; i < data.size(); ++i) {
    Eigen::Index best = 0;
    outputs[i].maxCoeff(&best);
    predicted.push_back(static_cast<std::size_t>(best));
    const double t = data[i].target;
    if (t < 0.0 || std::round(t) != t) throw Error(ErrorCode::LabelOutOfRange, "invalid class label");
    truth.push_back(static_cast<std::size_t>(t));
  }
  return classification_metrics(predicted, truth, params.task.num_classes);
}

std::vector<IndexList> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k == 0 || k > n) throw Error(ErrorCode::ConfigError, "fold count must be in [1, n]");
  IndexList order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<IndexList> folds(k);
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<long>(start), order.begin() + static_cast<long>(start + size));
    std::sort(folds[f].begin(), folds[f].end());
    start += size;
  }
  return folds;
}

void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  out << "epoch,train_loss,val_loss,lr\n" << std::setprecision(17);
  for (const auto& r : history) out << r.epoch << ',' << r.train_loss << ',' << r.val_loss << ',' << r.lr << '\n';
}

std::vector<EpochRecord> read_history_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<EpochRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    EpochRecord r;
    if (!(row >> r.epoch >> r.train_loss >> r.val_loss >> r.lr)) {
      throw ParseError(ErrorCode::ParseError, out.size() + 1, 0, "malformed history row");
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace hsgp
