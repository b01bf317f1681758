// Acceptance run: one [PASS]/[FAIL] line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "hsgp/augmentation.hpp"
#include "hsgp/checkpoint.hpp"
#include "hsgp/dataset.hpp"
#include "hsgp/hgp_layer.hpp"
#include "hsgp/model.hpp"
#include "hsgp/saliency.hpp"
#include "hsgp/signed_graph.hpp"
#include "hsgp/training.hpp"
#include "test_support.hpp"

using namespace hsgp;
using namespace hsgp::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check, double budget_s = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = check();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0 && secs >= budget_s) {
    out.pass = false;
    out.detail += " (over the " + std::to_string(budget_s) + " s budget)";
  }
  if (!out.pass) ++failures;
  std::printf("[%s] %d %s (%.2f s): %s\n", out.pass ? "PASS" : "FAIL", id, name.c_str(), secs, out.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

// Degree-normalized weights by explicit loops over the raw adjacency.
Matrix normalize_oracle(const Matrix& a, int sign) {
  const auto n = a.rows();
  std::vector<double> degree(n, 0.0);
  Matrix w = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      w(i, j) = sign > 0 ? std::max(a(i, j), 0.0) : std::max(-a(i, j), 0.0);
      degree[i] += w(i, j);
    }
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (degree[i] > 0 && degree[j] > 0) out(i, j) = w(i, j) / std::sqrt(degree[i] * degree[j]);
  return out;
}

InfoScores info_oracle(const NormalizedAdjacency& norm, const NodeEmbedding& emb) {
  const auto n = static_cast<Eigen::Index>(norm.nodes());
  InfoScores s{Vector::Zero(n), Vector::Zero(n), Vector::Zero(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index c = 0; c < emb.balanced.cols(); ++c) {
        s.balanced(i) += norm.pos_norm(i, j) * std::abs(emb.balanced(j, c)) +
                         norm.neg_norm(i, j) * std::abs(emb.unbalanced(j, c));
        s.unbalanced(i) += norm.pos_norm(i, j) * std::abs(emb.unbalanced(j, c)) +
                           norm.neg_norm(i, j) * std::abs(emb.balanced(j, c));
      }
    s.total(i) = s.balanced(i) + s.unbalanced(i);
  }
  return s;
}

ModelDims desk_dims() {
  ModelDims d;
  d.hidden = 4;
  return d;
}

FunctionalNetwork permuted(const FunctionalNetwork& g, const std::vector<std::size_t>& perm) {
  FunctionalNetwork out{permute_symmetric(g.adjacency, perm), permute_rows(g.features, perm), {}};
  for (auto p : perm) out.node_labels.push_back(g.node_labels[p]);
  return out;
}

Outcome identity_augmentation() {
  std::mt19937_64 rng(2024);
  for (int s = 0; s < 20; ++s) {
    const auto pair = augment_pair(random_bold(16, 60, rng), AugmentConfig{0});
    if (!(pair.hat_network.adjacency == pair.check_network.adjacency) ||
        !(pair.hat_network.features == pair.check_network.features))
      return {false, "subject " + std::to_string(s) + " differs"};
  }
  return {true, "20 subjects bitwise identical"};
}

Outcome similarity_ordering() {
  const std::vector<std::size_t> windows{0, 5, 10, 20, 40};
  const double phi = SyntheticSpec{}.ar_coefficient;
  double worst_gap = 1e9, worst_rho = -1e9, mean_rho = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<BoldMatrix> subjects;
    for (int m = 0; m < 32; ++m) subjects.push_back(ar1_bold(32, 200, phi, rng));
    std::vector<double> x, y;
    for (auto d : windows) {
      std::vector<ContrastivePair> pairs;
      for (const auto& b : subjects) pairs.push_back(augment_pair(b, AugmentConfig{d}));
      const auto stats = pair_similarity_stats(pairs, SimilarityMetric::Cosine);
      if (d == 10) worst_gap = std::min(worst_gap, stats.inner - stats.inter);
      x.push_back(static_cast<double>(d));
      y.push_back(stats.inner);
    }
    const double rho = spearman(x, y);
    worst_rho = std::max(worst_rho, rho);
    mean_rho += rho / 20.0;
  }
  return {worst_gap >= 0.05 && worst_rho < 0.0,
          fmt("min inner-inter gap at d=10 %.4f, max per-seed rho %.3f, mean rho %.3f", worst_gap, worst_rho,
              mean_rho)};
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<Eigen::Index> n_dist(2, 12), c_dist(1, 5);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = n_dist(rng);
    const Matrix a = random_signed_adjacency(n, rng);
    const auto norm = normalize_signed(a);
    worst = std::max({worst, max_abs_diff(norm.pos_norm, normalize_oracle(a, +1)),
                      max_abs_diff(norm.neg_norm, normalize_oracle(a, -1))});
    const auto c = c_dist(rng);
    const auto emb = make_embedding(random_matrix(n, c, rng), random_matrix(n, c, rng));
    const auto s = information_scores(norm, emb);
    const auto o = info_oracle(norm, emb);
    worst = std::max({worst, max_abs_diff(s.balanced, o.balanced), max_abs_diff(s.unbalanced, o.unbalanced),
                      max_abs_diff(s.total, o.total)});
  }
  return {worst <= 1e-10, fmt("max deviation %.3e over 100 graphs", worst)};
}

Outcome pooling_structure() {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const auto graph = augment_pair(random_bold(32, 80, rng), AugmentConfig{5}).hat_network;
    const auto e = forward_embed(ModelParams::random(desk_dims(), TaskSpec::classification(2), seed), graph,
                                 PoolConfig{});
    if (e.layers.size() != 3) return {false, "seed " + std::to_string(seed) + ": wrong layer count"};
    IndexList global(32);
    std::iota(global.begin(), global.end(), 0);
    FunctionalNetwork current = graph;
    for (const auto& layer : e.layers) {
      const auto n = layer.nodes_before;
      const auto& kept = layer.kept_indices;
      std::set<std::size_t> kept_set(kept.begin(), kept.end());
      if (n != global.size() || kept.size() >= n || kept_set.size() != kept.size() || *kept_set.rbegin() >= n)
        return {false, "seed " + std::to_string(seed) + ": kept set is not a strict subset"};
      for (std::size_t u = 0; u < n; ++u) {
        const bool is_kept = kept_set.count(u) > 0;
        const auto hit = layer.assignment.find(u);
        if (is_kept == (hit != layer.assignment.end()))
          return {false, "seed " + std::to_string(seed) + ": node assigned zero or several times"};
        if (!is_kept && kept_set.count(hit->second) == 0)
          return {false, "seed " + std::to_string(seed) + ": assignment to a non-hub"};
      }
      if (layer.assignment.size() + kept.size() != n) return {false, "stray assignment keys"};
      IndexList next;
      for (auto k : kept) next.push_back(global[k]);
      current = pool_graph(current, kept).network;
      for (std::size_t i = 0; i < next.size(); ++i)
        for (std::size_t j = 0; j < next.size(); ++j)
          if (current.adjacency(i, j) != graph.adjacency(next[i], next[j]))
            return {false, "seed " + std::to_string(seed) + ": pooled adjacency is not a submatrix"};
      global = next;
    }
  }
  return {true, "100 seeds, 3 layers each"};
}

Outcome permutation_properties() {
  double worst_score = 0.0, worst_embed = 0.0;
  bool topk_ok = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed + 500);
    const auto params = ModelParams::random(desk_dims(), TaskSpec::classification(2), seed);
    const auto graph = augment_pair(random_bold(10, 50, rng), AugmentConfig{5}).hat_network;
    const auto emb = make_embedding(random_matrix(10, 3, rng), random_matrix(10, 3, rng));
    const auto scores = information_scores(normalize_signed(graph.adjacency), emb);
    const auto base = forward_embed(params, graph, PoolConfig{});
    const auto kept = select_topk(scores, 5);
    for (int k = 0; k < 20; ++k) {
      const auto perm = random_permutation(10, rng);
      const auto moved_scores =
          information_scores(normalize_signed(permute_symmetric(graph.adjacency, perm)),
                             make_embedding(permute_rows(emb.balanced, perm), permute_rows(emb.unbalanced, perm)));
      worst_score = std::max(worst_score, max_abs_diff(moved_scores.total, permute_rows(scores.total, perm)));
      std::vector<std::size_t> image;
      for (auto i : select_topk(moved_scores, 5)) image.push_back(perm[i]);
      std::sort(image.begin(), image.end());
      topk_ok = topk_ok && image == kept;
      const auto moved = forward_embed(params, permuted(graph, perm), PoolConfig{});
      worst_embed = std::max(worst_embed, max_abs_diff(moved.vector, base.vector));
    }
  }
  return {worst_score < 1e-12 && worst_embed < 1e-12 && topk_ok,
          fmt("score deviation %.2e, embedding deviation %.2e", worst_score, worst_embed) +
              (topk_ok ? ", top-k sets map onto each other" : ", top-k sets differ")};
}

Outcome gradient_check() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed + 900);
    std::vector<LabeledPair> batch{{augment_pair(random_bold(8, 40, rng), AugmentConfig{5}), 0.0},
                                   {augment_pair(random_bold(8, 40, rng), AugmentConfig{5}), 1.0}};
    std::vector<const LabeledPair*> ptrs{&batch[0], &batch[1]};
    auto params = ModelParams::random(desk_dims(), TaskSpec::classification(2), seed);
    ObjectiveConfig cfg;
    const Vector g = gradients(params, ptrs, cfg);
    const Vector base = params.flatten();
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      Vector up = base, down = base;
      up(i) += h;
      down(i) -= h;
      params.assign(up);
      const double fu = batch_objective(params, ptrs, cfg, false).loss;
      params.assign(down);
      const double fd = (fu - batch_objective(params, ptrs, cfg, false).loss) / (2 * h);
      worst = std::max(worst, std::abs(g(i) - fd) / std::max({std::abs(g(i)), std::abs(fd), 1e-6}));
    }
  }
  return {worst < 1e-4, fmt("worst relative error %.3e over 5 seeds", worst)};
}

Outcome contrastive_contract() {
  const Matrix same = Matrix::Ones(2, 4);
  const double zero = ntxent_batch(same, same, 0.2);
  Matrix unit(2, 2);
  unit << 1, 0, 0, 1;
  const double five = ntxent_batch(unit, unit, 0.2);
  return {std::abs(zero) <= 1e-12 && std::abs(five + 5.0) <= 1e-12,
          fmt("identical batch %.3e, orthogonal case %.15f", zero, five)};
}

struct LearningRun {
  double max_train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double majority = 0.0;
  double planted_mean = 0.0;
  double complement_mean = 0.0;
};

LearningRun learning_run(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.seed = seed;
  const auto data = generate_synthetic(spec);
  const auto pairs = make_pairs(data.subjects, AugmentConfig{10});
  const auto folds = kfold_split(pairs.size(), 5, seed);
  std::vector<LabeledPair> train_set, val_set, test_set;
  for (std::size_t f = 0; f < folds.size(); ++f)
    for (auto i : folds[f]) (f == 0 ? test_set : f == 1 ? val_set : train_set).push_back(pairs[i]);

  ModelDims dims;
  dims.hidden = 4;
  TrainingConfig cfg = TrainingConfig::defaults_for(TaskKind::Classification);
  cfg.max_epochs = 300;
  cfg.seed = seed;
  const PoolConfig pool;
  LearningRun run;
  const auto result = train(train_set, val_set, ModelParams::random(dims, TaskSpec::classification(2), seed), cfg,
                            pool, [&](const EpochRecord&, const ModelParams& p) {
                              run.max_train_accuracy =
                                  std::max(run.max_train_accuracy, evaluate(p, train_set, pool).accuracy);
                            });
  run.test_accuracy = evaluate(result.params, test_set, pool).accuracy;
  double ones = 0.0;
  for (const auto& p : test_set) ones += p.target;
  run.majority = std::max(ones, test_set.size() - ones) / static_cast<double>(test_set.size());

  std::vector<SaliencyMap> maps;
  for (const auto& p : train_set)
    if (p.target == 1.0) maps.push_back(sample_saliency(result.params, p.pair, SaliencyTarget{1}, pool));
  const auto avg = average_maps(maps);
  const std::set<std::size_t> planted(data.planted_nodes.begin(), data.planted_nodes.end());
  double s = 0.0, c = 0.0;
  for (Eigen::Index i = 0; i < avg.normalized.size(); ++i)
    (planted.count(static_cast<std::size_t>(i)) ? s : c) += avg.normalized(i);
  run.planted_mean = s / static_cast<double>(planted.size());
  run.complement_mean = c / static_cast<double>(avg.normalized.size() - planted.size());
  return run;
}

std::vector<LearningRun> learning_runs;

Outcome end_to_end_learning() {
  int ok = 0;
  std::ostringstream seeds;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    learning_runs.push_back(learning_run(seed));
    const auto& r = learning_runs.back();
    const bool pass = r.max_train_accuracy >= 0.95 && r.test_accuracy > r.majority;
    ok += pass;
    seeds << " s" << seed << fmt(":train %.3f/test %.3f/majority %.3f", r.max_train_accuracy, r.test_accuracy, r.majority)
          << (pass ? "" : "*");
  }
  return {ok >= 4, std::to_string(ok) + "/5 seeds pass;" + seeds.str()};
}

Outcome saliency_localization() {
  for (std::uint64_t seed = learning_runs.size(); seed < 20; ++seed) learning_runs.push_back(learning_run(seed));
  int ok = 0;
  double s = 0.0, c = 0.0;
  for (const auto& r : learning_runs) {
    ok += r.planted_mean > r.complement_mean;
    s += r.planted_mean / 20.0;
    c += r.complement_mean / 20.0;
  }
  return {ok >= 16, std::to_string(ok) + "/20 runs rank the planted subset higher" +
                        fmt(" (mean %.3f vs %.3f)", s, c)};
}

Outcome determinism() {
  SyntheticSpec spec;
  spec.n_subjects = 16;
  spec.n_nodes = 10;
  spec.signal_length = 60;
  spec.planted_size = 3;
  spec.seed = 3;
  const auto pairs = make_pairs(generate_synthetic(spec).subjects, AugmentConfig{5});
  const std::vector<LabeledPair> train_set(pairs.begin(), pairs.begin() + 12), val_set(pairs.begin() + 12, pairs.end());
  ModelDims dims;
  dims.hidden = 4;
  TrainingConfig cfg;
  cfg.max_epochs = 15;
  cfg.batch_size = 4;
  cfg.seed = 3;
  auto run = [&] {
    return train(train_set, val_set, ModelParams::random(dims, TaskSpec::classification(2), 3), cfg, PoolConfig{});
  };
  const auto a = run(), b = run();
  bool same = a.history.size() == b.history.size() && a.best_epoch == b.best_epoch && a.params.flatten() == b.params.flatten();
  for (std::size_t i = 0; same && i < a.history.size(); ++i)
    same = a.history[i].train_loss == b.history[i].train_loss && a.history[i].val_loss == b.history[i].val_loss &&
           a.history[i].lr == b.history[i].lr;
  const auto path = std::filesystem::temp_directory_path() / "hsgp_acceptance_checkpoint.json";
  save_checkpoint(Checkpoint{a.params, 3}, path);
  const auto back = load_checkpoint(path);
  const bool exact = back.params.flatten() == a.params.flatten() && back.seed == 3;
  return {same && exact, std::string(same ? "histories identical" : "histories differ") + ", " +
                             (exact ? "checkpoint round-trip exact" : "checkpoint round-trip lossy")};
}

}  // namespace

int main() {
  report(1, "identity augmentation", identity_augmentation, 1.0);
  report(2, "similarity ordering", similarity_ordering, 30.0);
  report(3, "normalization and score oracles", oracle_equivalence);
  report(4, "pooling structure", pooling_structure);
  report(5, "permutation properties", permutation_properties);
  report(6, "gradient check", gradient_check, 60.0);
  report(7, "contrastive loss contract", contrastive_contract);
  report(8, "end-to-end learning", end_to_end_learning, 600.0);
  report(9, "saliency localization", saliency_localization);
  report(10, "determinism", determinism);
  return failures == 0 ? 0 : 1;
}
