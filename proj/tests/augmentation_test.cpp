#include <gtest/gtest.h>

#include <cmath>

#include "hsgp/augmentation.hpp"
#include "hsgp/errors.hpp"
#include "test_support.hpp"

using namespace hsgp;
using namespace hsgp::testing;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::DataError;
}

}  // namespace

TEST(ClampSignals, HeadAndTailWindows) {
  Matrix b(1, 6);
  b << 1, 2, 3, 4, 5, 6;
  const auto [hat, check] = clamp_signals(b, 2);
  Matrix want_hat(1, 4), want_check(1, 4);
  want_hat << 3, 4, 5, 6;
  want_check << 1, 2, 3, 4;
  EXPECT_TRUE(hat == want_hat);
  EXPECT_TRUE(check == want_check);
}

TEST(ClampSignals, WindowErrors) {
  const Matrix b = Matrix::Random(3, 8);
  EXPECT_EQ(code_of([&] { clamp_signals(b, 8); }), ErrorCode::WindowTooLarge);
  EXPECT_EQ(code_of([&] { clamp_signals(b, 12); }), ErrorCode::WindowTooLarge);
  EXPECT_EQ(code_of([&] { clamp_signals(b, 5); }), ErrorCode::WindowLeavesTooFew);
  EXPECT_NO_THROW(clamp_signals(b, 4));
}

TEST(AugmentPair, ZeroWindowIsIdentity) {
  std::mt19937_64 rng(1);
  for (int s = 0; s < 20; ++s) {
    const auto bold = random_bold(7, 30, rng);
    const auto pair = augment_pair(bold, AugmentConfig{0});
    EXPECT_TRUE(pair.hat_network.adjacency == pair.check_network.adjacency);
    EXPECT_TRUE(pair.hat_network.adjacency == pearson_network(bold).adjacency);
  }
}

TEST(AugmentPair, ViewsShareFullSignalFeatures) {
  std::mt19937_64 rng(4);
  const auto bold = random_bold(5, 40, rng);
  const auto pair = augment_pair(bold, AugmentConfig{10}, "s1");
  EXPECT_EQ(pair.subject_id, "s1");
  EXPECT_TRUE(pair.hat_network.features == pair.check_network.features);
  EXPECT_TRUE(pair.hat_network.features == node_features(bold));
  EXPECT_EQ(pair.hat_network.node_labels, pair.check_network.node_labels);
}

TEST(AugmentPair, AdjacenciesComeFromClampedSignals) {
  std::mt19937_64 rng(8);
  const auto bold = random_bold(4, 20, rng);
  const auto pair = augment_pair(bold, AugmentConfig{3});
  BoldMatrix hat{bold.data.rightCols(17), bold.node_labels};
  BoldMatrix check{bold.data.leftCols(17), bold.node_labels};
  EXPECT_TRUE(pair.hat_network.adjacency == pearson_network(hat).adjacency);
  EXPECT_TRUE(pair.check_network.adjacency == pearson_network(check).adjacency);
}

TEST(AugmentPair, WindowEqualToLengthFails) {
  std::mt19937_64 rng(2);
  const auto bold = random_bold(3, 10, rng);
  EXPECT_EQ(code_of([&] { augment_pair(bold, AugmentConfig{10}); }), ErrorCode::WindowTooLarge);
}

TEST(AdjacencyCosine, SelfAndNegation) {
  std::mt19937_64 rng(3);
  const Matrix a = random_matrix(4, 4, rng);
  EXPECT_NEAR(adjacency_cosine(a, a), 1.0, 1e-15);
  EXPECT_NEAR(adjacency_cosine(a, -a), -1.0, 1e-15);
}

TEST(AdjacencyCosine, MatchesFlattenOracle) {
  std::mt19937_64 rng(17);
  const Matrix a = random_matrix(4, 4, rng), b = random_matrix(4, 4, rng);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      dot += a(i, j) * b(i, j);
      na += a(i, j) * a(i, j);
      nb += b(i, j) * b(i, j);
    }
  EXPECT_NEAR(adjacency_cosine(a, b), dot / std::sqrt(na * nb), 1e-14);
}

TEST(AdjacencyCosine, Errors) {
  EXPECT_EQ(code_of([] { adjacency_cosine(Matrix::Ones(2, 2), Matrix::Ones(3, 3)); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([] { adjacency_cosine(Matrix::Zero(2, 2), Matrix::Ones(2, 2)); }), ErrorCode::ZeroMatrix);
}

TEST(AdjacencyL1, Examples) {
  std::mt19937_64 rng(5);
  const Matrix a = random_matrix(3, 3, rng);
  EXPECT_EQ(adjacency_l1_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(adjacency_l1_distance(Matrix::Ones(3, 3), Matrix::Zero(3, 3)), 1.0);
  EXPECT_EQ(code_of([] { adjacency_l1_distance(Matrix::Ones(2, 2), Matrix::Ones(2, 3)); }),
            ErrorCode::ShapeMismatch);
}

TEST(AdjacencyL1, MatchesLoopOracle) {
  std::mt19937_64 rng(23);
  const Matrix a = random_matrix(3, 3, rng), b = random_matrix(3, 3, rng);
  double sum = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) sum += std::abs(a(i, j) - b(i, j));
  EXPECT_NEAR(adjacency_l1_distance(a, b), sum / 9.0, 1e-15);
}

TEST(AdjacencyL2, MatchesLoopOracle) {
  std::mt19937_64 rng(29);
  const Matrix a = random_matrix(3, 3, rng), b = random_matrix(3, 3, rng);
  double sum = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) sum += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
  EXPECT_NEAR(adjacency_l2_distance(a, b), std::sqrt(sum / 9.0), 1e-15);
  EXPECT_EQ(adjacency_l2_distance(a, a), 0.0);
}

TEST(SimilarityMetric, ParseAndDispatch) {
  EXPECT_EQ(parse_metric("cosine"), SimilarityMetric::Cosine);
  EXPECT_EQ(parse_metric("l1"), SimilarityMetric::L1);
  EXPECT_EQ(parse_metric("l2"), SimilarityMetric::L2);
  EXPECT_EQ(to_string(SimilarityMetric::L2), "l2");
  EXPECT_EQ(code_of([] { parse_metric("manhattan"); }), ErrorCode::ConfigError);
  std::mt19937_64 rng(1);
  const Matrix a = random_matrix(3, 3, rng), b = random_matrix(3, 3, rng);
  EXPECT_EQ(adjacency_similarity(a, b, SimilarityMetric::L1), adjacency_l1_distance(a, b));
  EXPECT_EQ(adjacency_similarity(a, b, SimilarityMetric::Cosine), adjacency_cosine(a, b));
}

TEST(PairSimilarityStats, SinglePairInnerEqualsInter) {
  std::mt19937_64 rng(6);
  const std::vector<ContrastivePair> pairs{augment_pair(random_bold(5, 30, rng), AugmentConfig{5})};
  for (auto metric : {SimilarityMetric::Cosine, SimilarityMetric::L1}) {
    const auto s = pair_similarity_stats(pairs, metric);
    EXPECT_EQ(s.inner, s.inter);
  }
}

TEST(PairSimilarityStats, IdenticalCopies) {
  std::mt19937_64 rng(7);
  const auto pair = augment_pair(random_bold(5, 30, rng), AugmentConfig{5});
  const std::vector<ContrastivePair> pairs(4, pair);
  const auto s = pair_similarity_stats(pairs, SimilarityMetric::Cosine);
  const double psi = adjacency_cosine(pair.hat_network.adjacency, pair.check_network.adjacency);
  EXPECT_NEAR(s.inner, psi, 1e-15);
  EXPECT_NEAR(s.inter, psi, 1e-15);
}

TEST(PairSimilarityStats, InterIncludesDiagonalTerms) {
  std::mt19937_64 rng(9);
  std::vector<ContrastivePair> pairs;
  for (int m = 0; m < 3; ++m) pairs.push_back(augment_pair(random_bold(4, 25, rng), AugmentConfig{4}));
  double inter = 0.0;
  for (const auto& p : pairs)
    for (const auto& q : pairs) inter += adjacency_l1_distance(p.hat_network.adjacency, q.check_network.adjacency);
  EXPECT_NEAR(pair_similarity_stats(pairs, SimilarityMetric::L1).inter, inter / 9.0, 1e-15);
}

TEST(PairSimilarityStats, EmptyIsError) {
  EXPECT_EQ(code_of([] { pair_similarity_stats({}, SimilarityMetric::Cosine); }), ErrorCode::EmptyDataset);
}

TEST(PairSimilarityStats, InnerExceedsInterOnAr1Subjects) {
  std::mt19937_64 rng(31);
  std::vector<ContrastivePair> pairs;
  for (int m = 0; m < 8; ++m) pairs.push_back(augment_pair(ar1_bold(16, 200, 0.5, rng), AugmentConfig{10}));
  const auto s = pair_similarity_stats(pairs, SimilarityMetric::Cosine);
  EXPECT_GT(s.inner, s.inter);
}

TEST(PairSimilarityStats, InnerCosineFallsWithWindow) {
  const std::vector<std::size_t> windows{0, 5, 10, 20, 40};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<BoldMatrix> subjects;
    for (int m = 0; m < 8; ++m) subjects.push_back(ar1_bold(16, 200, 0.5, rng));
    std::vector<double> x, y;
    for (auto d : windows) {
      std::vector<ContrastivePair> pairs;
      for (const auto& b : subjects) pairs.push_back(augment_pair(b, AugmentConfig{d}));
      x.push_back(static_cast<double>(d));
      y.push_back(pair_similarity_stats(pairs, SimilarityMetric::Cosine).inner);
    }
    EXPECT_LT(spearman(x, y), 0.0) << "seed " << seed;
  }
}
