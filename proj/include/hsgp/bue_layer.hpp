#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hsgp/signed_graph.hpp"
#include "hsgp/tape.hpp"

namespace hsgp {

/// One balanced/unbalanced embedding layer (single-head signed attention).
///
/// Positive edges couple like streams, negative edges couple opposite
/// streams. With P = input * W and Z = tanh(P):
///   B' = tanh(P_B + att_pos * Z_B * M_pos_b + att_neg * Z_U * M_neg_b)
///   U' = tanh(P_U + att_pos * Z_U * M_pos_u + att_neg * Z_B * M_neg_u)
/// where att_pos(i, j) = softmax over positive neighbours j of
/// LeakyReLU(a_pos . [Z_B(i) | Z_B(j)]) times the normalized positive weight,
/// and att_neg uses LeakyReLU(a_neg . [Z_B(i) | Z_U(j)]) on negative edges.
struct BueParams {
  Matrix w_balanced_in;        // C_in x C_hidden
  Matrix w_unbalanced_in;      // C_in x C_hidden
  Matrix attn_vec_pos;         // 1 x 2*C_hidden
  Matrix attn_vec_neg;         // 1 x 2*C_hidden
  Matrix mix_pos_balanced;     // C_hidden x C_hidden
  Matrix mix_neg_balanced;     // C_hidden x C_hidden
  Matrix mix_pos_unbalanced;   // C_hidden x C_hidden
  Matrix mix_neg_unbalanced;   // C_hidden x C_hidden

  static BueParams zeros(Eigen::Index c_in, Eigen::Index c_hidden);
  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per tensor.
  static BueParams random(Eigen::Index c_in, Eigen::Index c_hidden, std::mt19937_64& rng);

  Eigen::Index input_width() const { return w_balanced_in.rows(); }
  Eigen::Index hidden_width() const { return w_balanced_in.cols(); }

  /// Tensors in their fixed enumeration order.
  std::vector<std::pair<std::string, Matrix*>> tensors();
  std::vector<std::pair<std::string, const Matrix*>> tensors() const;

  void validate() const;
};

inline constexpr double kAttentionSlope = 0.2;

struct NodeEmbedding {
  Matrix balanced;
  Matrix unbalanced;
  Matrix fused;

  std::size_t nodes() const { return static_cast<std::size_t>(fused.rows()); }
};

/// Channel-wise concatenation, balanced channels first.
Matrix fuse(const Matrix& balanced, const Matrix& unbalanced);
NodeEmbedding make_embedding(Matrix balanced, Matrix unbalanced);

/// BueParams bound onto a tape.
struct BueVars {
  ad::Var w_balanced_in, w_unbalanced_in, attn_vec_pos, attn_vec_neg;
  ad::Var mix_pos_balanced, mix_neg_balanced, mix_pos_unbalanced, mix_neg_unbalanced;
};

BueVars bind(ad::Tape& tape, const BueParams& params, bool trainable);

struct StreamVars {
  ad::Var balanced;
  ad::Var unbalanced;
};

StreamVars bue_forward(const BueVars& params, const NormalizedAdjacency& norm,
                       const StreamVars& input);

/// First-layer form: both streams are projected from the same input features.
NodeEmbedding bue_forward(const BueParams& params, const NormalizedAdjacency& norm,
                          const Matrix& features);
NodeEmbedding bue_forward(const BueParams& params, const NormalizedAdjacency& norm,
                          const Matrix& in_balanced, const Matrix& in_unbalanced);

}  // namespace hsgp
