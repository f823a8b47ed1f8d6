#ifndef CSYN_ATTENTION_HPP
#define CSYN_ATTENTION_HPP

// Single-head scaled dot-product cross attention, and the two ways of
// letting decoder states attend to two syntax memories:
//
//   independent  attend(Q, M_c; P_c) + attend(Q, M_d; P_d)
//   sharing      attend(Q, [M_c; M_d]; P)
//
// The sharing mode is the ablation with one cross-attention layer for both.

#include "csyn/syntax_graph.hpp"

namespace csyn {

struct AttentionParams {
  Matrix query;  // d x d, applied as Q * Wq
  Matrix key;
  Matrix value;

  static AttentionParams random(std::size_t width, std::uint64_t seed);
};

// Row-stochastic weights softmax((Q Wq)(M Wk)^T / sqrt(d)), m x k.
Matrix attention_weights(const Matrix& queries, const Matrix& memory, const AttentionParams& params);

// attention_weights(...) * (M Wv). Throws std::invalid_argument on width
// mismatch or an empty memory.
Matrix cross_attention(const Matrix& queries, const Matrix& memory, const AttentionParams& params);

struct AttentionGradients {
  AttentionParams params;
  Matrix queries;
  Matrix memory;
};

// Gradients of sum(upstream .* cross_attention(...)).
AttentionGradients cross_attention_backward(const Matrix& queries, const Matrix& memory,
                                            const AttentionParams& params, const Matrix& upstream);

enum class CombineMode { independent, sharing };

struct DualAttentionParams {
  CombineMode mode = CombineMode::independent;
  AttentionParams constituency;  // the single shared set in sharing mode
  AttentionParams dependency;    // unused in sharing mode
};

Matrix dual_combine(const Matrix& queries, const Matrix& constituency_memory, const Matrix& dependency_memory,
                    const DualAttentionParams& params);

struct DualAttentionGradients {
  AttentionParams constituency;
  AttentionParams dependency;  // zero in sharing mode
};

DualAttentionGradients dual_combine_backward(const Matrix& queries, const Matrix& constituency_memory,
                                             const Matrix& dependency_memory, const DualAttentionParams& params,
                                             const Matrix& upstream);

nlohmann::json to_json(const AttentionParams& params);
AttentionParams attention_params_from_json(const nlohmann::json& j);

}  // namespace csyn

#endif
