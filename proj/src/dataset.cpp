#include "hsgp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "hsgp/errors.hpp"

namespace hsgp {

std::vector<Subject> load_dataset(const std::filesystem::path& dir) {
  const auto labels_path = dir / "labels.csv";
  std::ifstream in(labels_path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + labels_path.string());
  std::string line;
  std::getline(in, line);
  std::vector<Subject> subjects;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(ErrorCode::ParseError, row, 0, "expected subject_id,target");
    Subject s;
    s.id = line.substr(0, comma);
    try {
      std::size_t used = 0;
      const std::string value = line.substr(comma + 1);
      s.target = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ParseError(ErrorCode::ParseError, row, 1, "target is not a number");
    }
    s.bold = load_bold_csv(dir / (s.id + ".csv"));
    subjects.push_back(std::move(s));
  }
  if (subjects.empty()) throw Error(ErrorCode::EmptyDataset, "no subjects listed in " + labels_path.string());
  return subjects;
}

void save_dataset(const std::vector<Subject>& subjects, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream labels(dir / "labels.csv");
  if (!labels) throw Error(ErrorCode::MissingFile, "cannot write into " + dir.string());
  labels << "subject_id,target\n" << std::setprecision(17);
  for (const auto& s : subjects) {
    labels << s.id << ',' << s.target << '\n';
    save_bold_csv(s.bold, dir / (s.id + ".csv"));
  }
}

std::vector<LabeledPair> make_pairs(const std::vector<Subject>& subjects, const AugmentConfig& cfg) {
  std::vector<LabeledPair> pairs;
  pairs.reserve(subjects.size());
  for (const auto& s : subjects) pairs.push_back(LabeledPair{augment_pair(s.bold, cfg, s.id), s.target});
  return pairs;
}

void SyntheticSpec::validate() const {
  if (n_subjects == 0) throw Error(ErrorCode::InvalidSpec, "n_subjects must be positive");
  if (n_nodes < 2) throw Error(ErrorCode::InvalidSpec, "n_nodes must be at least 2");
  if (signal_length < kMinTimepoints) throw Error(ErrorCode::InvalidSpec, "signal_length must be at least 4");
  if (n_classes < 1) throw Error(ErrorCode::InvalidSpec, "n_classes must be positive");
  if (planted_size >= n_nodes) throw Error(ErrorCode::InvalidSpec, "planted subset must be smaller than N");
  if (!(effect_size >= 0.0) || !(noise_level > 0.0)) {
    throw Error(ErrorCode::InvalidSpec, "effect size must be >= 0 and noise level > 0");
  }
  if (!(std::abs(ar_coefficient) < 1.0)) throw Error(ErrorCode::InvalidSpec, "AR coefficient must be in (-1, 1)");
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SyntheticDataset out;
  IndexList nodes(spec.n_nodes);
  std::iota(nodes.begin(), nodes.end(), 0);
  std::shuffle(nodes.begin(), nodes.end(), rng);
  out.planted_nodes.assign(nodes.begin(), nodes.begin() + static_cast<long>(spec.planted_size));
  std::sort(out.planted_nodes.begin(), out.planted_nodes.end());

  std::vector<std::string> labels;
  for (std::size_t i = 0; i < spec.n_nodes; ++i) {
    std::ostringstream name;
    name << "roi_" << std::setw(3) << std::setfill('0') << i;
    labels.push_back(name.str());
  }

  const auto n = static_cast<Eigen::Index>(spec.n_nodes);
  const auto d = static_cast<Eigen::Index>(spec.signal_length);
  const double phi = spec.ar_coefficient;
  const double innovation = std::sqrt(1.0 - phi * phi);
  for (std::size_t s = 0; s < spec.n_subjects; ++s) {
    Subject subject;
    const std::size_t cls = s % spec.n_classes;
    std::ostringstream id;
    id << "sub_" << std::setw(4) << std::setfill('0') << s;
    subject.id = id.str();
    subject.target = static_cast<double>(cls);
    subject.bold.node_labels = labels;
    subject.bold.data.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      double x = normal(rng);
      for (Eigen::Index t = 0; t < d; ++t) {
        if (t > 0) x = phi * x + innovation * normal(rng);
        subject.bold.data(i, t) = spec.noise_level * x;
      }
    }
    // Centered chi-square(1) latent: unit variance, strongly right-skewed.
    RowVector latent(d);
    for (Eigen::Index t = 0; t < d; ++t) {
      const double g = normal(rng);
      latent[t] = (g * g - 1.0) / std::sqrt(2.0);
    }
    const double coupling =
        spec.n_classes > 1 ? spec.effect_size * static_cast<double>(cls) / static_cast<double>(spec.n_classes - 1) : 0.0;
    if (coupling != 0.0) {
      for (const std::size_t node : out.planted_nodes) {
        subject.bold.data.row(static_cast<Eigen::Index>(node)) += coupling * latent;
      }
    }
    out.subjects.push_back(std::move(subject));
  }
  return out;
}

double planted_mean_abs_correlation(const BoldMatrix& bold, const IndexList& planted) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < planted.size(); ++a) {
    for (std::size_t b = a + 1; b < planted.size(); ++b) {
      total += std::abs(pearson(bold.data.row(static_cast<Eigen::Index>(planted[a])),
                                bold.data.row(static_cast<Eigen::Index>(planted[b]))));
      ++count;
    }
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

}  // namespace hsgp
