#include "masgcn/views.h"

#include <cmath>

namespace masgcn::views {

ag::Var aspect_attention(const encoder::ContextualEncoding& enc, ag::Var w_a, ag::Var w_k,
                         ag::Var b_a) {
  ag::Var q = ag::matmul(enc.h_aspect_hat, w_a);
  ag::Var k = ag::matmul(enc.h, w_k);
  return ag::tanh(ag::add_scalar(ag::matmul_nt(q, k), b_a));
}

ag::Var self_attention(const encoder::ContextualEncoding& enc, ag::Var w_q, ag::Var w_k) {
  const double d = static_cast<double>(enc.h.cols());
  ag::Var q = ag::matmul(enc.h, w_q);
  ag::Var k = ag::matmul(enc.h, w_k);
  return ag::scale(ag::matmul_nt(q, k), 1.0 / std::sqrt(d));
}

ag::Var semantic_matrix(ag::Var a_asp, ag::Var a_self) { return ag::add(a_asp, a_self); }

TypeAttention type_attention(const IntMat& type0, ag::Var h_type, ag::Var w_t) {
  TypeAttention out;
  ag::Var scores = ag::matmul(h_type, w_t);                             // U x 1
  out.alpha = ag::transpose(ag::softmax_rows(ag::transpose(scores)));  // U x 1
  out.matrix = ag::gather_ids(out.alpha, type0);
  return out;
}

ViewAdjacencies assemble_views(std::span<const ag::Var> sem, std::span<const Mat> masks,
                               ag::Var type_matrix) {
  if (sem.size() != masks.size()) throw Error("assemble_views: view count mismatch");
  if (type_matrix.value().hasNaN()) throw NumericError("assemble_views: NaN in type matrix");
  ViewAdjacencies v;
  v.type = type_matrix;
  for (std::size_t i = 0; i < sem.size(); ++i) {
    if (sem[i].value().hasNaN()) throw NumericError("assemble_views: NaN in semantic matrix");
    if (masks[i].hasNaN()) throw NumericError("assemble_views: NaN in mask");
    ag::Tape& t = sem[i].tape();
    ag::Var masked = ag::add(sem[i], t.constant_ref(masks[i]));
    ag::Var m = ag::softmax_rows(masked);
    v.sem.push_back(sem[i]);
    v.mask.push_back(m);
    v.adj.push_back(ag::add(m, type_matrix));
  }
  return v;
}

ag::Var view_gate(std::span<const ag::Var> products, ag::Var w1, ag::Var w2, GateMode mode) {
  if (products.empty()) throw Error("view_gate: no views");
  ag::Tape& t = products.front().tape();
  const auto p = static_cast<Eigen::Index>(products.size());
  if (mode == GateMode::kMean) return t.constant(Mat::Constant(p, 1, 1.0 / static_cast<double>(p)));
  if (w1.rows() != p || w1.cols() != p || w2.rows() != p || w2.cols() != p) {
    throw Error("view_gate: gate weights must be P x P");
  }
  std::vector<ag::Var> avgs;
  avgs.reserve(products.size());
  for (const auto& prod : products) avgs.push_back(ag::mean(prod));
  ag::Var h_avg = ag::stack(avgs);
  ag::Var gate = ag::matmul(w2, ag::relu(ag::matmul(w1, h_avg)));
  if (mode == GateMode::kNormalized) gate = ag::transpose(ag::softmax_rows(ag::transpose(gate)));
  return gate;
}

namespace {

std::vector<ag::Var> products_of(ag::Var h_prev, std::span<const ag::Var> adj) {
  std::vector<ag::Var> prods;
  prods.reserve(adj.size());
  for (const auto& a : adj) {
    if (a.cols() != h_prev.rows()) throw Error("gcn_layer: adjacency/feature shape mismatch");
    prods.push_back(ag::matmul(a, h_prev));
  }
  return prods;
}

}  // namespace

LayerOutput gcn_layer(ag::Var h_prev, std::span<const ag::Var> adj, ag::Var w_l, ag::Var w1,
                      ag::Var w2, GateMode mode) {
  if (w_l.rows() != h_prev.cols()) throw Error("gcn_layer: weight shape mismatch");
  std::vector<ag::Var> prods = products_of(h_prev, adj);
  LayerOutput out;
  out.gate = view_gate(prods, w1, w2, mode);
  out.h = ag::relu(ag::matmul(ag::weighted_sum(prods, out.gate), w_l));
  return out;
}

ag::Var gcn_layer_with_gate(ag::Var h_prev, std::span<const ag::Var> adj, ag::Var w_l,
                            ag::Var gate) {
  if (w_l.rows() != h_prev.cols()) throw Error("gcn_layer: weight shape mismatch");
  std::vector<ag::Var> prods = products_of(h_prev, adj);
  return ag::relu(ag::matmul(ag::weighted_sum(prods, gate), w_l));
}

}  // namespace masgcn::views
