#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hsgp/augmentation.hpp"
#include "hsgp/model.hpp"

namespace hsgp {

struct Subject {
  std::string id;
  BoldMatrix bold;
  double target = 0.0;
};

/// Directory layout: labels.csv (subject_id,target) plus one <subject_id>.csv
/// time-series file per subject.
std::vector<Subject> load_dataset(const std::filesystem::path& dir);
void save_dataset(const std::vector<Subject>& subjects, const std::filesystem::path& dir);

std::vector<LabeledPair> make_pairs(const std::vector<Subject>& subjects, const AugmentConfig& cfg);

/// Seeded AR(1) background per node; subjects of class k additionally carry
/// effect_size * k / (n_classes - 1) times a shared, skewed latent series on
/// the planted nodes, which raises within-subset correlation and the
/// skewness/kurtosis of those nodes.
struct SyntheticSpec {
  std::size_t n_subjects = 64;
  std::size_t n_nodes = 32;
  std::size_t signal_length = 200;
  std::size_t n_classes = 2;
  std::size_t planted_size = 8;
  double effect_size = 2.0;
  double noise_level = 1.0;
  double ar_coefficient = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticDataset {
  std::vector<Subject> subjects;
  IndexList planted_nodes;  // ascending
};

SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

/// Mean |correlation| over distinct planted-node pairs of one subject.
double planted_mean_abs_correlation(const BoldMatrix& bold, const IndexList& planted);

}  // namespace hsgp
