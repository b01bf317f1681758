#include "hsgp/bue_layer.hpp"

#include <cmath>

#include "hsgp/errors.hpp"

namespace hsgp {
namespace {

Matrix uniform(Eigen::Index rows, Eigen::Index cols, double fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(fan_in);
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = dist(rng);
  return m;
}

Matrix support_mask(const Matrix& weights) {
  return (weights.array() > 0.0).cast<double>().matrix();
}

}  // namespace

BueParams BueParams::zeros(Eigen::Index c_in, Eigen::Index c_hidden) {
  BueParams p;
  p.w_balanced_in = Matrix::Zero(c_in, c_hidden);
  p.w_unbalanced_in = Matrix::Zero(c_in, c_hidden);
  p.attn_vec_pos = Matrix::Zero(1, 2 * c_hidden);
  p.attn_vec_neg = Matrix::Zero(1, 2 * c_hidden);
  p.mix_pos_balanced = Matrix::Zero(c_hidden, c_hidden);
  p.mix_neg_balanced = Matrix::Zero(c_hidden, c_hidden);
  p.mix_pos_unbalanced = Matrix::Zero(c_hidden, c_hidden);
  p.mix_neg_unbalanced = Matrix::Zero(c_hidden, c_hidden);
  return p;
}

BueParams BueParams::random(Eigen::Index c_in, Eigen::Index c_hidden, std::mt19937_64& rng) {
  const double in = static_cast<double>(c_in);
  const double hidden = static_cast<double>(c_hidden);
  BueParams p;
  p.w_balanced_in = uniform(c_in, c_hidden, in, rng);
  p.w_unbalanced_in = uniform(c_in, c_hidden, in, rng);
  p.attn_vec_pos = uniform(1, 2 * c_hidden, 2.0 * hidden, rng);
  p.attn_vec_neg = uniform(1, 2 * c_hidden, 2.0 * hidden, rng);
  p.mix_pos_balanced = uniform(c_hidden, c_hidden, hidden, rng);
  p.mix_neg_balanced = uniform(c_hidden, c_hidden, hidden, rng);
  p.mix_pos_unbalanced = uniform(c_hidden, c_hidden, hidden, rng);
  p.mix_neg_unbalanced = uniform(c_hidden, c_hidden, hidden, rng);
  return p;
}

std::vector<std::pair<std::string, Matrix*>> BueParams::tensors() {
  return {{"w_balanced_in", &w_balanced_in},       {"w_unbalanced_in", &w_unbalanced_in},
          {"attn_vec_pos", &attn_vec_pos},         {"attn_vec_neg", &attn_vec_neg},
          {"mix_pos_balanced", &mix_pos_balanced}, {"mix_neg_balanced", &mix_neg_balanced},
          {"mix_pos_unbalanced", &mix_pos_unbalanced}, {"mix_neg_unbalanced", &mix_neg_unbalanced}};
}

std::vector<std::pair<std::string, const Matrix*>> BueParams::tensors() const {
  std::vector<std::pair<std::string, const Matrix*>> out;
  for (auto& [name, ptr] : const_cast<BueParams*>(this)->tensors()) out.emplace_back(name, ptr);
  return out;
}

void BueParams::validate() const {
  const Eigen::Index h = hidden_width();
  const Eigen::Index in = input_width();
  const bool shapes_ok =
      w_unbalanced_in.rows() == in && w_unbalanced_in.cols() == h &&
      attn_vec_pos.rows() == 1 && attn_vec_pos.cols() == 2 * h && attn_vec_neg.rows() == 1 &&
      attn_vec_neg.cols() == 2 * h && mix_pos_balanced.rows() == h && mix_pos_balanced.cols() == h &&
      mix_neg_balanced.rows() == h && mix_neg_balanced.cols() == h &&
      mix_pos_unbalanced.rows() == h && mix_pos_unbalanced.cols() == h &&
      mix_neg_unbalanced.rows() == h && mix_neg_unbalanced.cols() == h;
  if (!shapes_ok) throw Error(ErrorCode::ShapeMismatch, "inconsistent BUE parameter shapes");
  for (const auto& [name, m] : tensors()) {
    if (!m->allFinite()) throw Error(ErrorCode::NonFiniteParams, "non-finite BUE parameter " + name);
  }
}

Matrix fuse(const Matrix& balanced, const Matrix& unbalanced) {
  if (balanced.rows() != unbalanced.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "fuse: row counts differ");
  }
  Matrix out(balanced.rows(), balanced.cols() + unbalanced.cols());
  out << balanced, unbalanced;
  return out;
}

NodeEmbedding make_embedding(Matrix balanced, Matrix unbalanced) {
  NodeEmbedding e;
  e.fused = fuse(balanced, unbalanced);
  e.balanced = std::move(balanced);
  e.unbalanced = std::move(unbalanced);
  return e;
}

BueVars bind(ad::Tape& tape, const BueParams& p, bool trainable) {
  auto leaf = [&](const Matrix& m) { return trainable ? tape.variable(m) : tape.constant(m); };
  return BueVars{leaf(p.w_balanced_in),    leaf(p.w_unbalanced_in),    leaf(p.attn_vec_pos),
                 leaf(p.attn_vec_neg),     leaf(p.mix_pos_balanced),   leaf(p.mix_neg_balanced),
                 leaf(p.mix_pos_unbalanced), leaf(p.mix_neg_unbalanced)};
}

StreamVars bue_forward(const BueVars& p, const NormalizedAdjacency& norm, const StreamVars& input) {
  using namespace ad;
  const Eigen::Index n = input.balanced.rows();
  const Eigen::Index h = p.w_balanced_in.cols();
  if (input.unbalanced.rows() != n || norm.pos_norm.rows() != n || norm.neg_norm.rows() != n ||
      input.balanced.cols() != p.w_balanced_in.rows() ||
      input.unbalanced.cols() != p.w_unbalanced_in.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "BUE input does not match graph or parameters");
  }

  const Var pre_b = matmul(input.balanced, p.w_balanced_in);
  const Var pre_u = matmul(input.unbalanced, p.w_unbalanced_in);
  const Var z_b = tanh(pre_b);
  const Var z_u = tanh(pre_u);

  auto attention = [&](const Var& attn_vec, const Var& self, const Var& neighbour, const Matrix& weights) {
    const Var left = matmul(self, transpose(slice_cols(attn_vec, 0, h)));
    const Var right = matmul(neighbour, transpose(slice_cols(attn_vec, h, h)));
    const Var scores = leaky_relu(outer_sum(left, right), kAttentionSlope);
    return hadamard_const(masked_softmax_rows(scores, support_mask(weights)), weights);
  };
  const Var att_pos = attention(p.attn_vec_pos, z_b, z_b, norm.pos_norm);
  const Var att_neg = attention(p.attn_vec_neg, z_b, z_u, norm.neg_norm);

  const Var msg_b = add(matmul(matmul(att_pos, z_b), p.mix_pos_balanced),
                        matmul(matmul(att_neg, z_u), p.mix_neg_balanced));
  const Var msg_u = add(matmul(matmul(att_pos, z_u), p.mix_pos_unbalanced),
                        matmul(matmul(att_neg, z_b), p.mix_neg_unbalanced));
  return StreamVars{tanh(add(pre_b, msg_b)), tanh(add(pre_u, msg_u))};
}

NodeEmbedding bue_forward(const BueParams& params, const NormalizedAdjacency& norm,
                          const Matrix& in_balanced, const Matrix& in_unbalanced) {
  params.validate();
  ad::Tape tape;
  const BueVars vars = bind(tape, params, false);
  const StreamVars out =
      bue_forward(vars, norm, StreamVars{tape.constant(in_balanced), tape.constant(in_unbalanced)});
  return make_embedding(out.balanced.value(), out.unbalanced.value());
}

NodeEmbedding bue_forward(const BueParams& params, const NormalizedAdjacency& norm,
                          const Matrix& features) {
  return bue_forward(params, norm, features, features);
}

}  // namespace hsgp
