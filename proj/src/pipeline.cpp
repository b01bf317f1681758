#include "hsgp/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "hsgp/checkpoint.hpp"
#include "hsgp/errors.hpp"

namespace hsgp {

using nlohmann::json;

namespace {

json to_json(const RunConfig& cfg) {
  const auto& t = cfg.training;
  const auto& s = cfg.synth;
  return json{
      {"task", to_string(cfg.task.kind)},
      {"num_classes", cfg.task.num_classes},
      {"data_dir", cfg.data_dir.string()},
      {"output_dir", cfg.output_dir.string()},
      {"checkpoint", cfg.checkpoint.string()},
      {"folds", cfg.folds},
      {"fold", cfg.fold},
      {"window_size", cfg.augment.window_size},
      {"metric", to_string(cfg.metric)},
      {"ratio", cfg.pool.ratio},
      {"layers", cfg.pool.layers},
      {"hidden", static_cast<std::size_t>(cfg.dims.hidden)},
      {"head_hidden", static_cast<std::size_t>(cfg.dims.head_hidden)},
      {"batch_size", t.batch_size},
      {"temperature", t.temperature},
      {"mu1", t.mu1},
      {"mu2", t.mu2},
      {"base_lr", t.base_lr},
      {"weight_decay", t.weight_decay},
      {"max_epochs", t.max_epochs},
      {"patience", t.patience},
      {"seed", t.seed},
      {"symmetric_contrastive", t.symmetric_contrastive},
      {"saliency_class", cfg.saliency_class},
      {"top_k", cfg.top_k},
      {"synth_subjects", s.n_subjects},
      {"synth_nodes", s.n_nodes},
      {"synth_length", s.signal_length},
      {"synth_planted", s.planted_size},
      {"synth_effect", s.effect_size},
      {"synth_noise", s.noise_level},
      {"synth_ar", s.ar_coefficient},
  };
}

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorCode::ConfigError, message); }

template <typename T>
T get_field(const json& j, const std::string& key, const T& fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if constexpr (std::is_same_v<T, bool>) {
    if (!it->is_boolean()) config_error(key + " must be a boolean");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!it->is_string()) config_error(key + " must be a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_unsigned()) config_error(key + " must be a non-negative integer");
  } else {
    if (!it->is_number()) config_error(key + " must be a number");
  }
  return it->get<T>();
}

RunConfig from_json(const json& j) {
  if (!j.is_object()) config_error("config must be a JSON object");
  const json known = to_json(RunConfig{});
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) config_error("unknown config key '" + key + "'");
  }

  RunConfig cfg;
  const auto task_name = get_field<std::string>(j, "task", "classification");
  try {
    cfg.task.kind = parse_task(task_name);
  } catch (const Error& e) {
    config_error(e.what());
  }
  cfg.task.num_classes = get_field<std::size_t>(j, "num_classes", 2);
  if (cfg.task.kind == TaskKind::Regression) cfg.task.num_classes = 0;

  cfg.training = TrainingConfig::defaults_for(cfg.task.kind);
  auto& t = cfg.training;
  cfg.data_dir = get_field<std::string>(j, "data_dir", cfg.data_dir.string());
  cfg.output_dir = get_field<std::string>(j, "output_dir", cfg.output_dir.string());
  cfg.checkpoint = get_field<std::string>(j, "checkpoint", "");
  cfg.folds = get_field(j, "folds", cfg.folds);
  cfg.fold = get_field(j, "fold", cfg.fold);
  cfg.augment.window_size = get_field(j, "window_size", cfg.augment.window_size);
  try {
    cfg.metric = parse_metric(get_field<std::string>(j, "metric", "cosine"));
  } catch (const Error& e) {
    config_error(e.what());
  }
  cfg.pool.ratio = get_field(j, "ratio", cfg.pool.ratio);
  cfg.pool.layers = get_field(j, "layers", cfg.pool.layers);
  cfg.dims.layers = cfg.pool.layers;
  cfg.dims.hidden = static_cast<Eigen::Index>(get_field<std::size_t>(j, "hidden", cfg.dims.hidden));
  cfg.dims.head_hidden = static_cast<Eigen::Index>(get_field<std::size_t>(j, "head_hidden", cfg.dims.head_hidden));
  t.batch_size = get_field(j, "batch_size", t.batch_size);
  t.temperature = get_field(j, "temperature", t.temperature);
  t.mu1 = get_field(j, "mu1", t.mu1);
  t.mu2 = get_field(j, "mu2", t.mu2);
  t.base_lr = get_field(j, "base_lr", t.base_lr);
  t.weight_decay = get_field(j, "weight_decay", t.weight_decay);
  t.max_epochs = get_field(j, "max_epochs", t.max_epochs);
  t.patience = get_field(j, "patience", t.patience);
  t.seed = get_field(j, "seed", t.seed);
  t.symmetric_contrastive = get_field(j, "symmetric_contrastive", t.symmetric_contrastive);
  cfg.saliency_class = get_field(j, "saliency_class", cfg.saliency_class);
  cfg.top_k = get_field(j, "top_k", cfg.top_k);

  auto& s = cfg.synth;
  s.n_subjects = get_field(j, "synth_subjects", s.n_subjects);
  s.n_nodes = get_field(j, "synth_nodes", s.n_nodes);
  s.signal_length = get_field(j, "synth_length", s.signal_length);
  s.planted_size = get_field(j, "synth_planted", s.planted_size);
  s.effect_size = get_field(j, "synth_effect", s.effect_size);
  s.noise_level = get_field(j, "synth_noise", s.noise_level);
  s.ar_coefficient = get_field(j, "synth_ar", s.ar_coefficient);
  s.n_classes = std::max<std::size_t>(cfg.task.num_classes, 1);
  s.seed = t.seed;

  cfg.validate();
  return cfg;
}

json parse_override(const std::string& key, const std::string& text, const json& like) {
  if (like.is_string()) return text;
  if (like.is_boolean()) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    config_error("--" + key + " expects true or false, got '" + text + "'");
  }
  if (like.is_number_unsigned()) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
      config_error("--" + key + " expects a non-negative integer, got '" + text + "'");
    return value;
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
    config_error("--" + key + " expects a number, got '" + text + "'");
  return value;
}

void write_json(const json& doc, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::string format_value(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

void check_targets(const std::vector<Subject>& subjects, const TaskSpec& task) {
  for (const auto& s : subjects) {
    if (!std::isfinite(s.target)) throw Error(ErrorCode::DataError, "non-finite target for " + s.id);
    if (task.kind != TaskKind::Classification) continue;
    if (s.target < 0 || s.target != std::floor(s.target) ||
        s.target >= static_cast<double>(task.num_classes))
      throw Error(ErrorCode::DataError, "target of " + s.id + " is not a class index below num_classes");
  }
}

std::vector<Subject> load_checked(const RunConfig& cfg) {
  auto subjects = load_dataset(cfg.data_dir);
  check_targets(subjects, cfg.task);
  return subjects;
}

}  // namespace

void RunConfig::validate() const {
  if (task.kind == TaskKind::Classification && task.num_classes < 2)
    config_error("classification needs num_classes >= 2");
  if (folds < 2) config_error("folds must be at least 2");
  if (fold >= folds) config_error("fold must be below folds");
  if (dims.hidden < 1 || dims.head_hidden < 1) config_error("hidden widths must be positive");
  if (top_k == 0) config_error("top_k must be positive");
  try {
    pool.validate();
    training.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
}

std::filesystem::path RunConfig::checkpoint_path() const {
  return checkpoint.empty() ? output_dir / "checkpoint.json" : checkpoint;
}

std::vector<std::string> run_config_keys() {
  const json defaults = to_json(RunConfig{});
  std::vector<std::string> keys;
  for (const auto& [key, value] : defaults.items()) keys.push_back(key);
  return keys;
}

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    config_error(std::string("malformed config JSON: ") + e.what());
  }
  return from_json(doc);
}

std::string dump_run_config(const RunConfig& cfg) { return to_json(cfg).dump(2); }

RunConfig resolve_run_config(const std::optional<std::filesystem::path>& config_file,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
  json doc = json::object();
  if (config_file) {
    std::ifstream in(*config_file);
    if (!in) config_error("cannot open config " + config_file->string());
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      config_error("malformed config " + config_file->string() + ": " + e.what());
    }
    if (!doc.is_object()) config_error("config must be a JSON object");
  }
  const json defaults = to_json(RunConfig{});
  for (const auto& [key, text] : overrides) {
    if (!defaults.contains(key)) config_error("unknown option --" + key);
    doc[key] = parse_override(key, text, defaults[key]);
  }
  return from_json(doc);
}

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) { write_json(to_json(cfg), path); }

Command parse_command(const std::string& name) {
  if (name == "synth") return Command::Synth;
  if (name == "augment") return Command::Augment;
  if (name == "train") return Command::Train;
  if (name == "eval") return Command::Eval;
  if (name == "saliency") return Command::Saliency;
  if (name == "sweep") return Command::Sweep;
  config_error("unknown command '" + name + "'");
}

std::string to_string(Command command) {
  switch (command) {
    case Command::Synth: return "synth";
    case Command::Augment: return "augment";
    case Command::Train: return "train";
    case Command::Eval: return "eval";
    case Command::Saliency: return "saliency";
    case Command::Sweep: return "sweep";
  }
  return "unknown";
}

FoldSplit split_for_fold(const std::vector<Subject>& subjects, const RunConfig& cfg) {
  if (subjects.size() < cfg.folds)
    throw Error(ErrorCode::DataError, "dataset has fewer subjects than folds");
  const auto pairs = make_pairs(subjects, cfg.augment);
  const auto folds = kfold_split(pairs.size(), cfg.folds, cfg.training.seed);
  FoldSplit split;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    auto& dest = f == cfg.fold ? split.validation : split.train;
    for (auto i : folds[f]) dest.push_back(pairs[i]);
  }
  return split;
}

void write_metrics_json(const Metrics& metrics, double val_loss, const std::filesystem::path& path) {
  json doc{{"task", to_string(metrics.task)}, {"count", metrics.count}, {"val_loss", val_loss}};
  if (metrics.task == TaskKind::Classification) {
    doc["accuracy"] = metrics.accuracy;
    doc["precision"] = metrics.precision;
    doc["recall"] = metrics.recall;
    doc["f1"] = metrics.f1;
  } else {
    doc["mae"] = metrics.mae;
  }
  write_json(doc, path);
}

SyntheticDataset run_synth(const RunConfig& cfg) {
  auto data = generate_synthetic(cfg.synth);
  save_dataset(data.subjects, cfg.data_dir);
  const auto& s = cfg.synth;
  json spec{{"n_subjects", s.n_subjects},     {"n_nodes", s.n_nodes},
            {"signal_length", s.signal_length}, {"n_classes", s.n_classes},
            {"planted_size", s.planted_size},   {"effect_size", s.effect_size},
            {"noise_level", s.noise_level},     {"ar_coefficient", s.ar_coefficient},
            {"seed", s.seed},                   {"planted_nodes", data.planted_nodes}};
  write_json(spec, cfg.data_dir / "synth_spec.json");
  return data;
}

PairSimilarity run_augment(const RunConfig& cfg, const std::optional<std::filesystem::path>& report) {
  const auto subjects = load_dataset(cfg.data_dir);
  std::vector<ContrastivePair> pairs;
  pairs.reserve(subjects.size());
  for (const auto& s : subjects) pairs.push_back(augment_pair(s.bold, cfg.augment, s.id));
  const auto stats = pair_similarity_stats(pairs, cfg.metric);
  json doc{{"window_size", cfg.augment.window_size},
           {"n_pairs", pairs.size()},
           {"inner", stats.inner},
           {"inter", stats.inter}};
  write_json(doc, report.value_or(cfg.output_dir / "augment_report.json"));
  return stats;
}

TrainResult run_train(const RunConfig& cfg) {
  const auto split = split_for_fold(load_checked(cfg), cfg);
  auto params = ModelParams::random(cfg.dims, cfg.task, cfg.training.seed);
  auto result = train(split.train, split.validation, std::move(params), cfg.training, cfg.pool);

  std::filesystem::create_directories(cfg.output_dir);
  save_checkpoint(Checkpoint{result.params, cfg.training.seed}, cfg.checkpoint_path());
  write_history_csv(result.history, cfg.output_dir / "history.csv");
  write_metrics_json(evaluate(result.params, split.validation, cfg.pool), result.best_val_loss,
                     cfg.output_dir / "metrics.json");
  return result;
}

Metrics run_eval(const RunConfig& cfg) {
  const auto checkpoint = load_checkpoint(cfg.checkpoint_path());
  if (checkpoint.params.task.kind != cfg.task.kind || checkpoint.params.task.num_classes != cfg.task.num_classes)
    throw Error(ErrorCode::ConfigError, "checkpoint task differs from the configured task");
  const auto split = split_for_fold(load_checked(cfg), cfg);
  const auto metrics = evaluate(checkpoint.params, split.validation, cfg.pool);
  const double loss = dataset_loss(checkpoint.params, split.validation, cfg.training, cfg.pool);
  write_metrics_json(metrics, loss, cfg.output_dir / "eval_metrics.json");
  return metrics;
}

SaliencyMap run_saliency(const RunConfig& cfg) {
  const auto checkpoint = load_checkpoint(cfg.checkpoint_path());
  const auto subjects = load_checked(cfg);
  SaliencyTarget target;
  if (cfg.task.kind == TaskKind::Classification) target.class_index = cfg.saliency_class;

  std::vector<SaliencyMap> maps;
  for (const auto& s : subjects) {
    if (target.class_index && s.target != static_cast<double>(*target.class_index)) continue;
    maps.push_back(sample_saliency(checkpoint.params, augment_pair(s.bold, cfg.augment, s.id), target, cfg.pool));
  }
  if (maps.empty()) throw Error(ErrorCode::DataError, "no subjects belong to " + target.describe());

  const auto map = average_maps(maps);
  const auto& labels = subjects.front().bold.node_labels;
  std::filesystem::create_directories(cfg.output_dir);
  write_saliency_csv(map, labels, cfg.output_dir / "saliency.csv");
  write_saliency_summary(map, labels, std::min<std::size_t>(cfg.top_k, labels.size()),
                         cfg.output_dir / "saliency_summary.json");
  return map;
}

std::size_t run_sweep(const RunConfig& cfg, const std::string& param, const std::vector<double>& values) {
  if (values.empty()) config_error("sweep needs at least one value");
  if (param != "window_size" && param != "mu1" && param != "mu2" && param != "ratio")
    config_error("sweep parameter must be window_size, mu1, mu2 or ratio");

  const auto subjects = load_checked(cfg);
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream grid(cfg.output_dir / "sweep.csv");
  if (!grid) throw Error(ErrorCode::MissingFile, "cannot write sweep grid");
  grid << "param,value,best_epoch,best_val_loss,accuracy,f1,mae,inner_cosine,inter_cosine\n"
       << std::setprecision(17);

  for (double value : values) {
    RunConfig point = cfg;
    if (param == "window_size") {
      if (value < 0 || value != std::floor(value)) config_error("window_size values must be non-negative integers");
      point.augment.window_size = static_cast<std::size_t>(value);
    } else if (param == "mu1") {
      point.training.mu1 = value;
    } else if (param == "mu2") {
      point.training.mu2 = value;
    } else {
      point.pool.ratio = value;
    }
    point.output_dir = cfg.output_dir / (param + "_" + format_value(value));
    point.checkpoint.clear();
    point.validate();
    save_run_config(point, point.output_dir / "config.json");

    std::vector<ContrastivePair> pairs;
    for (const auto& s : subjects) pairs.push_back(augment_pair(s.bold, point.augment, s.id));
    const auto sim = pair_similarity_stats(pairs, SimilarityMetric::Cosine);

    const auto split = split_for_fold(subjects, point);
    auto result = train(split.train, split.validation, ModelParams::random(point.dims, point.task, point.training.seed),
                        point.training, point.pool);
    const auto metrics = evaluate(result.params, split.validation, point.pool);
    save_checkpoint(Checkpoint{result.params, point.training.seed}, point.checkpoint_path());
    write_history_csv(result.history, point.output_dir / "history.csv");
    write_metrics_json(metrics, result.best_val_loss, point.output_dir / "metrics.json");

    grid << param << ',' << value << ',' << result.best_epoch << ',' << result.best_val_loss << ','
         << metrics.accuracy << ',' << metrics.f1 << ',' << metrics.mae << ',' << sim.inner << ',' << sim.inter
         << '\n';
  }
  return values.size();
}

void run_pipeline(Command command, const RunConfig& cfg, const CommandOptions& options) {
  cfg.validate();
  save_run_config(cfg, cfg.output_dir / "config.json");
  switch (command) {
    case Command::Synth: run_synth(cfg); break;
    case Command::Augment: run_augment(cfg, options.report); break;
    case Command::Train: run_train(cfg); break;
    case Command::Eval: run_eval(cfg); break;
    case Command::Saliency: run_saliency(cfg); break;
    case Command::Sweep: run_sweep(cfg, options.sweep_param, options.sweep_values); break;
  }
}

}  // namespace hsgp
