#pragma once

// Semantic attention heads, view assembly with distance masks and the
// dependency-type matrix, and the multi-view gated GCN layer.

#include <span>
#include <vector>

#include "masgcn/autograd.h"
#include "masgcn/encoder.h"

namespace masgcn::views {

// tanh(Ĥ_a W_a (H W_k)^T + b_a). Rows are identical since Ĥ_a is.
ag::Var aspect_attention(const encoder::ContextualEncoding& enc, ag::Var w_a, ag::Var w_k,
                         ag::Var b_a);

// (H W_Q)(H W_K)^T / sqrt(D).
ag::Var self_attention(const encoder::ContextualEncoding& enc, ag::Var w_q, ag::Var w_k);

ag::Var semantic_matrix(ag::Var a_asp, ag::Var a_self);

struct TypeAttention {
  ag::Var alpha;   // U x 1, softmax of H_type W_t
  ag::Var matrix;  // N x N, alpha at each typed edge
};

// Throws if a type id falls outside [1, U].
TypeAttention type_attention(const IntMat& type0, ag::Var h_type, ag::Var w_t);

struct ViewAdjacencies {
  std::vector<ag::Var> sem;
  std::vector<ag::Var> mask;  // softmax(A_sem^i + M^i), row-stochastic
  std::vector<ag::Var> adj;   // mask^i + A_type
  ag::Var type;
};

// Throws NumericError on NaN input.
ViewAdjacencies assemble_views(std::span<const ag::Var> sem, std::span<const Mat> masks,
                               ag::Var type_matrix);

enum class GateMode {
  kLearned,     // W_2 relu(W_1 H_avg), raw values
  kNormalized,  // softmax over the learned values
  kMean,        // fixed 1/P per view
};

// H_avg(i) = mean of products[i]; returns the P x 1 gate for the mode.
ag::Var view_gate(std::span<const ag::Var> products, ag::Var w1, ag::Var w2,
                  GateMode mode = GateMode::kLearned);

struct LayerOutput {
  ag::Var h;
  ag::Var gate;
};

// relu((sum_i gate_i A^i H_prev) W_l).
LayerOutput gcn_layer(ag::Var h_prev, std::span<const ag::Var> adj, ag::Var w_l, ag::Var w1,
                      ag::Var w2, GateMode mode = GateMode::kLearned);

// Same layer with an externally supplied gate vector.
ag::Var gcn_layer_with_gate(ag::Var h_prev, std::span<const ag::Var> adj, ag::Var w_l,
                            ag::Var gate);

}  // namespace masgcn::views
