#include "hsgp/tape.hpp"

#include <cmath>
#include <limits>

#include "hsgp/errors.hpp"

namespace hsgp::ad {

const Matrix& Var::value() const { return tape_->value(*this); }

Var Tape::constant(Matrix value) { return record(std::move(value), false, nullptr); }

Var Tape::variable(Matrix value) { return record(std::move(value), true, nullptr); }

Var Tape::record(Matrix value, bool needs_grad, Backprop backprop) {
  Node node;
  node.value = std::move(value);
  node.needs_grad = needs_grad;
  if (needs_grad) node.backprop = std::move(backprop);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Matrix Tape::grad(const Var& v) const {
  const Node& node = nodes_[v.id_];
  if (!node.has_grad) return Matrix::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

void Tape::accumulate(const Var& v, const Matrix& g) {
  Node& node = nodes_[v.id_];
  if (!node.needs_grad) return;
  if (g.rows() != node.value.rows() || g.cols() != node.value.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "gradient shape does not match value shape");
  }
  if (node.has_grad) {
    node.grad += g;
  } else {
    node.grad = g;
    node.has_grad = true;
  }
}

void Tape::backward(const Var& output) { backward(output, Matrix::Ones(1, 1)); }

void Tape::backward(const Var& output, const Matrix& seed) {
  for (auto& node : nodes_) {
    node.has_grad = false;
    node.grad.resize(0, 0);
  }
  accumulate(output, seed);
  for (std::size_t i = output.id_ + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.has_grad || !node.backprop) continue;
    node.backprop(*this, node.grad);
  }
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::ShapeMismatch, what);
}

bool any_grad(const Var& a) { return a.tape()->needs_grad(a); }
bool any_grad(const Var& a, const Var& b) { return any_grad(a) || any_grad(b); }

}  // namespace

Var matmul(const Var& a, const Var& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Tape& t = *a.tape();
  return t.record(a.value() * b.value(), any_grad(a, b), [a, b](Tape& tape, const Matrix& g) {
    if (tape.needs_grad(a)) tape.accumulate(a, g * b.value().transpose());
    if (tape.needs_grad(b)) tape.accumulate(b, a.value().transpose() * g);
  });
}

Var add(const Var& a, const Var& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add: shapes differ");
  Tape& t = *a.tape();
  return t.record(a.value() + b.value(), any_grad(a, b), [a, b](Tape& tape, const Matrix& g) {
    tape.accumulate(a, g);
    tape.accumulate(b, g);
  });
}

Var sub(const Var& a, const Var& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "sub: shapes differ");
  Tape& t = *a.tape();
  return t.record(a.value() - b.value(), any_grad(a, b), [a, b](Tape& tape, const Matrix& g) {
    tape.accumulate(a, g);
    tape.accumulate(b, -g);
  });
}

Var scale(const Var& a, double factor) {
  Tape& t = *a.tape();
  return t.record(a.value() * factor, any_grad(a),
                  [a, factor](Tape& tape, const Matrix& g) { tape.accumulate(a, g * factor); });
}

Var add_row(const Var& a, const Var& row) {
  require(row.rows() == 1 && row.cols() == a.cols(), "add_row: bias shape");
  Tape& t = *a.tape();
  Matrix out = a.value().rowwise() + row.value().row(0);
  return t.record(std::move(out), any_grad(a, row), [a, row](Tape& tape, const Matrix& g) {
    tape.accumulate(a, g);
    if (tape.needs_grad(row)) tape.accumulate(row, g.colwise().sum());
  });
}

Var hadamard(const Var& a, const Var& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "hadamard: shapes differ");
  Tape& t = *a.tape();
  return t.record(a.value().cwiseProduct(b.value()), any_grad(a, b),
                  [a, b](Tape& tape, const Matrix& g) {
                    if (tape.needs_grad(a)) tape.accumulate(a, g.cwiseProduct(b.value()));
                    if (tape.needs_grad(b)) tape.accumulate(b, g.cwiseProduct(a.value()));
                  });
}

Var hadamard_const(const Var& a, const Matrix& c) {
  require(a.rows() == c.rows() && a.cols() == c.cols(), "hadamard_const: shapes differ");
  Tape& t = *a.tape();
  return t.record(a.value().cwiseProduct(c), any_grad(a),
                  [a, c](Tape& tape, const Matrix& g) { tape.accumulate(a, g.cwiseProduct(c)); });
}

Var transpose(const Var& a) {
  Tape& t = *a.tape();
  return t.record(a.value().transpose(), any_grad(a),
                  [a](Tape& tape, const Matrix& g) { tape.accumulate(a, g.transpose()); });
}

Var tanh(const Var& a) {
  Tape& t = *a.tape();
  Matrix out = a.value().array().tanh().matrix();
  Matrix deriv = (1.0 - out.array().square()).matrix();
  return t.record(std::move(out), any_grad(a), [a, deriv](Tape& tape, const Matrix& g) {
    tape.accumulate(a, g.cwiseProduct(deriv));
  });
}

Var leaky_relu(const Var& a, double slope) {
  Tape& t = *a.tape();
  const Matrix& x = a.value();
  Matrix out = x.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
  return t.record(std::move(out), any_grad(a), [a, slope](Tape& tape, const Matrix& g) {
    const Matrix& x = a.value();
    Matrix d = g;
    for (Eigen::Index k = 0; k < d.size(); ++k) {
      if (!(x.data()[k] > 0.0)) d.data()[k] *= slope;
    }
    tape.accumulate(a, d);
  });
}

Var outer_sum(const Var& u, const Var& v) {
  require(u.cols() == 1 && v.cols() == 1, "outer_sum: column vectors expected");
  Tape& t = *u.tape();
  Matrix out = u.value() * Matrix::Ones(1, v.rows()) + Matrix::Ones(u.rows(), 1) * v.value().transpose();
  return t.record(std::move(out), any_grad(u, v), [u, v](Tape& tape, const Matrix& g) {
    if (tape.needs_grad(u)) tape.accumulate(u, g.rowwise().sum());
    if (tape.needs_grad(v)) tape.accumulate(v, g.colwise().sum().transpose());
  });
}

Var masked_softmax_rows(const Var& a, const Matrix& mask) {
  require(a.rows() == mask.rows() && a.cols() == mask.cols(), "masked_softmax: mask shape");
  Tape& t = *a.tape();
  const Matrix& x = a.value();
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double peak = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (mask(i, j) != 0.0) peak = std::max(peak, x(i, j));
    }
    if (!std::isfinite(peak)) continue;
    double total = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (mask(i, j) != 0.0) {
        out(i, j) = std::exp(x(i, j) - peak);
        total += out(i, j);
      }
    }
    out.row(i) /= total;
  }
  Matrix probs = out;
  return t.record(std::move(out), any_grad(a), [a, probs](Tape& tape, const Matrix& g) {
    // d x_ij = p_ij (g_ij - sum_k p_ik g_ik); masked entries have p = 0.
    const Vector inner = probs.cwiseProduct(g).rowwise().sum();
    Matrix d = probs.cwiseProduct(g - inner * Matrix::Ones(1, g.cols()));
    tape.accumulate(a, d);
  });
}

Var concat_cols(const Var& a, const Var& b) {
  require(a.rows() == b.rows(), "concat_cols: row counts differ");
  Tape& t = *a.tape();
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  const Eigen::Index split = a.cols();
  return t.record(std::move(out), any_grad(a, b), [a, b, split](Tape& tape, const Matrix& g) {
    if (tape.needs_grad(a)) tape.accumulate(a, g.leftCols(split));
    if (tape.needs_grad(b)) tape.accumulate(b, g.rightCols(g.cols() - split));
  });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.cols(), "slice_cols: out of range");
  Tape& t = *a.tape();
  return t.record(a.value().middleCols(start, count), any_grad(a),
                  [a, start, count](Tape& tape, const Matrix& g) {
                    Matrix d = Matrix::Zero(a.rows(), a.cols());
                    d.middleCols(start, count) = g;
                    tape.accumulate(a, d);
                  });
}

Var gather_rows(const Var& a, const IndexList& rows) {
  Tape& t = *a.tape();
  Matrix out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= static_cast<std::size_t>(a.rows())) {
      throw Error(ErrorCode::IndexOutOfRange, "gather_rows: row index out of range");
    }
    out.row(static_cast<Eigen::Index>(r)) = a.value().row(static_cast<Eigen::Index>(rows[r]));
  }
  return t.record(std::move(out), any_grad(a), [a, rows](Tape& tape, const Matrix& g) {
    Matrix d = Matrix::Zero(a.rows(), a.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      d.row(static_cast<Eigen::Index>(rows[r])) += g.row(static_cast<Eigen::Index>(r));
    }
    tape.accumulate(a, d);
  });
}

Var sum_rows(const Var& a) {
  Tape& t = *a.tape();
  return t.record(a.value().colwise().sum(), any_grad(a), [a](Tape& tape, const Matrix& g) {
    tape.accumulate(a, Matrix::Ones(a.rows(), 1) * g);
  });
}

Var sum_all(const Var& a) {
  Tape& t = *a.tape();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return t.record(std::move(out), any_grad(a), [a](Tape& tape, const Matrix& g) {
    tape.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var log_softmax_rows(const Var& a) {
  Tape& t = *a.tape();
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double peak = x.row(i).maxCoeff();
    const double lse = peak + std::log((x.row(i).array() - peak).exp().sum());
    out.row(i) = x.row(i).array() - lse;
  }
  Matrix probs = out.array().exp().matrix();
  return t.record(std::move(out), any_grad(a), [a, probs](Tape& tape, const Matrix& g) {
    const Vector total = g.rowwise().sum();
    tape.accumulate(a, g - probs.cwiseProduct(total * Matrix::Ones(1, g.cols())));
  });
}

Var normalize_rows(const Var& a) {
  Tape& t = *a.tape();
  const Matrix& x = a.value();
  Vector norms = x.rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (!(norms[i] > 0.0)) throw Error(ErrorCode::ZeroNormEmbedding, "cannot normalize a zero-norm row");
  }
  Matrix out = norms.cwiseInverse().asDiagonal() * x;
  Matrix unit = out;
  return t.record(std::move(out), any_grad(a), [a, unit, norms](Tape& tape, const Matrix& g) {
    // d x = (g - (g . u) u) / |x|
    const Vector along = unit.cwiseProduct(g).rowwise().sum();
    Matrix d = g - along.asDiagonal() * unit;
    tape.accumulate(a, norms.cwiseInverse().asDiagonal() * d);
  });
}

}  // namespace hsgp::ad
