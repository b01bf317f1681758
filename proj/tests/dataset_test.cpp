#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "hsgp/dataset.hpp"
#include "hsgp/errors.hpp"

using namespace hsgp;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "hsgp_dataset_test" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

SyntheticSpec small_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_subjects = 12;
  spec.n_nodes = 10;
  spec.signal_length = 50;
  spec.planted_size = 4;
  spec.seed = seed;
  return spec;
}

double class_mean(const SyntheticDataset& data, double cls) {
  double total = 0.0;
  int count = 0;
  for (const auto& s : data.subjects) {
    if (s.target != cls) continue;
    total += planted_mean_abs_correlation(s.bold, data.planted_nodes);
    ++count;
  }
  return total / count;
}

}  // namespace

TEST(Synthetic, SameSeedIsBitwiseIdentical) {
  const auto a = generate_synthetic(small_spec(4));
  const auto b = generate_synthetic(small_spec(4));
  ASSERT_EQ(a.subjects.size(), b.subjects.size());
  EXPECT_EQ(a.planted_nodes, b.planted_nodes);
  for (std::size_t i = 0; i < a.subjects.size(); ++i) {
    EXPECT_EQ(a.subjects[i].id, b.subjects[i].id);
    EXPECT_EQ(a.subjects[i].target, b.subjects[i].target);
    EXPECT_TRUE(a.subjects[i].bold.data == b.subjects[i].bold.data);
  }
  EXPECT_FALSE(generate_synthetic(small_spec(5)).subjects[0].bold.data == a.subjects[0].bold.data);
}

TEST(Synthetic, ShapesLabelsAndPlantedSubset) {
  const auto data = generate_synthetic(small_spec(1));
  ASSERT_EQ(data.subjects.size(), 12u);
  EXPECT_EQ(data.planted_nodes.size(), 4u);
  EXPECT_TRUE(std::is_sorted(data.planted_nodes.begin(), data.planted_nodes.end()));
  EXPECT_LT(data.planted_nodes.back(), 10u);
  for (std::size_t s = 0; s < 12; ++s) {
    EXPECT_EQ(data.subjects[s].target, static_cast<double>(s % 2));
    EXPECT_EQ(data.subjects[s].bold.nodes(), 10u);
    EXPECT_EQ(data.subjects[s].bold.timepoints(), 50u);
    EXPECT_NO_THROW(validate(data.subjects[s].bold));
  }
  EXPECT_EQ(data.subjects[0].id, "sub_0000");
  EXPECT_EQ(data.subjects[0].bold.node_labels[3], "roi_003");
}

TEST(Synthetic, ZeroEffectMakesSignalsIndependentOfClass) {
  // With no class effect the signals cannot depend on the labels, so
  // relabelling the same seed into more classes leaves every series intact.
  auto two = small_spec(8);
  two.effect_size = 0.0;
  auto three = two;
  three.n_classes = 3;
  const auto a = generate_synthetic(two), b = generate_synthetic(three);
  for (std::size_t i = 0; i < a.subjects.size(); ++i) EXPECT_TRUE(a.subjects[i].bold.data == b.subjects[i].bold.data);
  EXPECT_NE(a.subjects[2].target, b.subjects[2].target);
}

TEST(Synthetic, ZeroEffectClassStatisticsAgree) {
  auto spec = small_spec(3);
  spec.n_subjects = 200;
  spec.effect_size = 0.0;
  const auto data = generate_synthetic(spec);
  EXPECT_LT(std::abs(class_mean(data, 0) - class_mean(data, 1)), 0.03);
}

TEST(Synthetic, PlantedCorrelationGapExceedsTenth) {
  SyntheticSpec spec;  // 64 subjects, 32 nodes, 8 planted, effect 2.0
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    spec.seed = seed;
    const auto data = generate_synthetic(spec);
    EXPECT_GT(class_mean(data, 1) - class_mean(data, 0), 0.1) << "seed " << seed;
  }
}

TEST(Synthetic, InvalidSpecs) {
  auto expect_invalid = [](SyntheticSpec spec) {
    try {
      generate_synthetic(spec);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidSpec);
    }
  };
  auto s = small_spec(0);
  s.planted_size = s.n_nodes;
  expect_invalid(s);
  s = small_spec(0);
  s.signal_length = 3;
  expect_invalid(s);
  s = small_spec(0);
  s.effect_size = -1;
  expect_invalid(s);
  s = small_spec(0);
  s.ar_coefficient = 1.0;
  expect_invalid(s);
  s = small_spec(0);
  s.n_subjects = 0;
  expect_invalid(s);
}

TEST(Dataset, SaveLoadRoundTrip) {
  const auto data = generate_synthetic(small_spec(2));
  const auto dir = fresh_dir("roundtrip");
  save_dataset(data.subjects, dir);
  const auto back = load_dataset(dir);
  ASSERT_EQ(back.size(), data.subjects.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].id, data.subjects[i].id);
    EXPECT_EQ(back[i].target, data.subjects[i].target);
    EXPECT_TRUE(back[i].bold.data == data.subjects[i].bold.data);
    EXPECT_EQ(back[i].bold.node_labels, data.subjects[i].bold.node_labels);
  }
}

TEST(Dataset, LoadErrors) {
  try {
    load_dataset(fresh_dir("empty_dir"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingFile);
  }
  const auto header_only = fresh_dir("header_only");
  std::ofstream(header_only / "labels.csv") << "subject_id,target\n";
  try {
    load_dataset(header_only);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDataset);
  }
  const auto bad_target = fresh_dir("bad_target");
  std::ofstream(bad_target / "labels.csv") << "subject_id,target\ns1,abc\n";
  try {
    load_dataset(bad_target);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
}

TEST(Dataset, MakePairsKeepsTargetsAndIds) {
  const auto data = generate_synthetic(small_spec(6));
  const auto pairs = make_pairs(data.subjects, AugmentConfig{10});
  ASSERT_EQ(pairs.size(), data.subjects.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(pairs[i].target, data.subjects[i].target);
    EXPECT_EQ(pairs[i].pair.subject_id, data.subjects[i].id);
  }
}
