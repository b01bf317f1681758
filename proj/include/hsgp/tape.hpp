#pragma once

// Minimal reverse-mode differentiation over dense matrices. Each Tape records
// the forward computation of one expression graph; backward() replays it in
// reverse and accumulates gradients into every node that depends on a
// variable leaf.

#include <functional>
#include <vector>

#include "hsgp/types.hpp"

namespace hsgp::ad {

class Tape;

class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backprop = std::function<void(Tape&, const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var variable(Matrix value);

  /// Records an op result. `backprop` receives d(out)/d(result) and must
  /// route it to the inputs via accumulate().
  Var record(Matrix value, bool needs_grad, Backprop backprop);

  const Matrix& value(const Var& v) const { return nodes_[v.id_].value; }
  bool needs_grad(const Var& v) const { return nodes_[v.id_].needs_grad; }

  /// Gradient of the last backward() output w.r.t. v (zeros if unreached).
  Matrix grad(const Var& v) const;

  void accumulate(const Var& v, const Matrix& g);

  /// Seeds a 1x1 output with 1.
  void backward(const Var& output);
  void backward(const Var& output, const Matrix& seed);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    bool has_grad = false;
    Backprop backprop;
  };

  std::vector<Node> nodes_;
};

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
/// Adds a 1 x C row to every row of a.
Var add_row(const Var& a, const Var& row);
Var hadamard(const Var& a, const Var& b);
Var hadamard_const(const Var& a, const Matrix& c);
Var transpose(const Var& a);
Var tanh(const Var& a);
Var leaky_relu(const Var& a, double slope);
/// (N x 1, M x 1) -> N x M with out(i, j) = u(i) + v(j).
Var outer_sum(const Var& u, const Var& v);
/// Row-wise softmax restricted to entries with mask != 0; rows with an empty
/// mask produce zeros.
Var masked_softmax_rows(const Var& a, const Matrix& mask);
Var concat_cols(const Var& a, const Var& b);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);
Var gather_rows(const Var& a, const IndexList& rows);
/// Column sums as a 1 x C row.
Var sum_rows(const Var& a);
Var sum_all(const Var& a);
Var log_softmax_rows(const Var& a);
/// Each row divided by its Euclidean norm; throws ZeroNormEmbedding on a zero row.
Var normalize_rows(const Var& a);

}  // namespace hsgp::ad
