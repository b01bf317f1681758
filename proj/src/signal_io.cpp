#include "hsgp/signal_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "hsgp/errors.hpp"

namespace hsgp {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw ParseError(ErrorCode::ParseError, row, col, "not a number: '" + std::string(cell) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(ErrorCode::NonFiniteValue, row, col, "non-finite value");
  }
  return value;
}

// Population central moments m2, m3, m4 of one row.
struct Moments {
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  bool constant = true;
};

Moments central_moments(const Eigen::Ref<const RowVector>& x) {
  Moments m;
  const double n = static_cast<double>(x.size());
  const double mean = x.mean();
  const double scale = x.cwiseAbs().maxCoeff();
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    const double c = x[t] - mean;
    const double c2 = c * c;
    m.m2 += c2;
    m.m3 += c2 * c;
    m.m4 += c2 * c2;
  }
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  const double floor = 1e-12 * std::max(scale, 1e-300);
  m.constant = m.m2 <= floor * floor;
  return m;
}

}  // namespace

void validate(const BoldMatrix& bold) {
  if (bold.data.rows() < 2) {
    throw Error(ErrorCode::DataError, "BoldMatrix needs at least 2 nodes");
  }
  if (bold.timepoints() < kMinTimepoints) {
    throw Error(ErrorCode::TooFewTimepoints,
                "need at least 4 timepoints, got " + std::to_string(bold.timepoints()));
  }
  if (!bold.data.allFinite()) {
    throw Error(ErrorCode::NonFiniteValue, "BoldMatrix contains non-finite entries");
  }
  if (bold.node_labels.size() != bold.nodes()) {
    throw Error(ErrorCode::ShapeMismatch, "label count does not match node count");
  }
}

BoldMatrix load_bold_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(ErrorCode::ParseError, 0, 0, "empty file " + path.string());
  }
  const std::size_t width = split_commas(line).size();
  if (width < 2) {
    throw ParseError(ErrorCode::ParseError, 0, 0, "header has no timepoint columns");
  }

  std::vector<std::string> labels;
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != width) {
      throw ParseError(ErrorCode::ParseError, row, cells.size(),
                       "expected " + std::to_string(width) + " cells");
    }
    labels.emplace_back(cells[0]);
    for (std::size_t c = 1; c < cells.size(); ++c) values.push_back(parse_cell(cells[c], row, c));
  }

  const std::size_t n = labels.size();
  const std::size_t d = width - 1;
  if (d < kMinTimepoints) {
    throw Error(ErrorCode::TooFewTimepoints, "need at least 4 timepoints, got " + std::to_string(d));
  }
  BoldMatrix bold;
  bold.data.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < d; ++t) bold.data(i, t) = values[i * d + t];
  }
  bold.node_labels = std::move(labels);
  validate(bold);
  return bold;
}

void save_bold_csv(const BoldMatrix& bold, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  out << "node";
  for (std::size_t t = 0; t < bold.timepoints(); ++t) out << ',' << t;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < bold.nodes(); ++i) {
    out << bold.node_labels[i];
    for (std::size_t t = 0; t < bold.timepoints(); ++t) out << ',' << bold.data(i, t);
    out << '\n';
  }
}

Matrix node_features(const BoldMatrix& bold) {
  Matrix features(bold.data.rows(), 2);
  for (Eigen::Index i = 0; i < bold.data.rows(); ++i) {
    const Moments m = central_moments(bold.data.row(i));
    if (m.constant) {
      features(i, 0) = 0.0;
      features(i, 1) = 0.0;
      continue;
    }
    features(i, 0) = m.m3 / std::pow(m.m2, 1.5);
    features(i, 1) = m.m4 / (m.m2 * m.m2) - 3.0;
  }
  return features;
}

double pearson(const RowVector& a, const RowVector& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "series lengths differ");
  const Moments ma = central_moments(a);
  const Moments mb = central_moments(b);
  if (ma.constant || mb.constant) return 0.0;
  const RowVector ca = a.array() - a.mean();
  const RowVector cb = b.array() - b.mean();
  const double r = ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  return std::clamp(r, -1.0, 1.0);
}

Matrix correlation_matrix(const Matrix& signals) {
  const Eigen::Index n = signals.rows();
  Matrix z(n, signals.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (central_moments(signals.row(i)).constant) {
      z.row(i).setZero();
      continue;
    }
    z.row(i) = signals.row(i).array() - signals.row(i).mean();
    z.row(i) /= z.row(i).norm();
  }
  Matrix corr = z * z.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    corr(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double r = std::clamp(corr(i, j), -1.0, 1.0);
      corr(i, j) = r;
      corr(j, i) = r;
    }
  }
  return corr;
}

FunctionalNetwork pearson_network(const BoldMatrix& bold) {
  validate(bold);
  return FunctionalNetwork{correlation_matrix(bold.data), node_features(bold), bold.node_labels};
}

void save_network_csv(const FunctionalNetwork& network, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  out << "node";
  for (const auto& label : network.node_labels) out << ',' << label;
  out << '\n' << std::setprecision(15);
  for (std::size_t i = 0; i < network.nodes(); ++i) {
    out << network.node_labels[i];
    for (std::size_t j = 0; j < network.nodes(); ++j) out << ',' << network.adjacency(i, j);
    out << '\n';
  }
}

Matrix load_network_csv(const std::filesystem::path& path, std::vector<std::string>* labels) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(ErrorCode::ParseError, 0, 0, "empty file");
  const auto header = split_commas(line);
  const std::size_t n = header.size() - 1;
  Matrix adjacency(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<std::string> row_labels;
  std::size_t row = 0;
  while (std::getline(in, line) && row < n) {
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != n + 1) {
      throw ParseError(ErrorCode::ParseError, row + 1, cells.size(), "ragged adjacency row");
    }
    row_labels.emplace_back(cells[0]);
    for (std::size_t c = 1; c <= n; ++c) adjacency(row, c - 1) = parse_cell(cells[c], row + 1, c);
    ++row;
  }
  if (row != n) throw ParseError(ErrorCode::ParseError, row + 1, 0, "adjacency is not square");
  if (labels) *labels = std::move(row_labels);
  return adjacency;
}

}  // namespace hsgp
