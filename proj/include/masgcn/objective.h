#pragma once

// Classifier head, cross-entropy, the structural-entropy loss over the
// dependency-type attention matrix, and the combined objective.

#include <span>
#include <vector>

#include "masgcn/autograd.h"

namespace masgcn::objective {

inline constexpr double kLogClamp = 1e-12;

// Mean of the final-layer rows at aspect positions, then W_p, b_p.
// w_p is D x 3, b_p is 1 x 3. Throws on an empty aspect.
ag::Var classify(ag::Var h_final, std::span<const int> aspect_rows, ag::Var w_p, ag::Var b_p);

ag::Var cross_entropy(ag::Var logits, int label);

// trace{ (Y^T A Y / 2ΣA) · log2(1_{U×N} A Y / 2ΣA) }, log argument clamped
// below at kLogClamp. Returns a constant 0 when ΣA = 0. Throws NumericError
// on negative entries.
ag::Var structural_entropy_loss(ag::Var a_type, const Mat& partition);

// Value-only evaluation of the same expression.
double structural_entropy_value(const Mat& a_type, const Mat& partition);

// Two-level structural entropy by direct summation over partition parts:
// sum_a -(g_a / vol) log2(V_a / vol), with vol the total edge weight, V_a
// the volume of part a and g_a its cut weight. Empty parts contribute 0.
double se_oracle(const Mat& a, const std::vector<std::vector<int>>& partition);

struct LossBundle {
  double ce = 0.0;  // sum over the batch
  double se = 0.0;  // mean over the batch
  double gamma = 0.0;
  double total = 0.0;
};

// total = ce + gamma * se; gamma = 0 yields exactly ce. Throws NumericError
// when a component is not finite or gamma < 0.
LossBundle total_loss(std::span<const double> ce_values, std::span<const double> se_values,
                      double gamma);

}  // namespace masgcn::objective
