#include "masgcn/objective.h"

#include <cmath>
#include <numeric>
#include <string>

namespace masgcn::objective {

ag::Var classify(ag::Var h_final, std::span<const int> aspect_rows, ag::Var w_p, ag::Var b_p) {
  if (aspect_rows.empty()) throw Error("classify: empty aspect mask");
  ag::Var pooled = ag::rows_mean(h_final, aspect_rows);
  return ag::add(ag::matmul(pooled, w_p), b_p);
}

ag::Var cross_entropy(ag::Var logits, int label) { return ag::cross_entropy(logits, label); }

namespace {

void check_nonnegative(const Mat& a) {
  if (a.hasNaN()) throw NumericError("structural entropy: NaN in type matrix");
  if (a.size() > 0 && a.minCoeff() < 0.0) {
    throw NumericError("structural entropy: negative entry in type matrix");
  }
}

}  // namespace

ag::Var structural_entropy_loss(ag::Var a_type, const Mat& partition) {
  const Mat& a = a_type.value();
  check_nonnegative(a);
  if (partition.rows() != a.rows()) throw Error("structural entropy: partition row count mismatch");
  ag::Tape& t = a_type.tape();
  if (a.sum() == 0.0) return t.constant(Mat::Zero(1, 1));
  ag::Var y = t.constant_ref(partition);
  ag::Var ones = t.constant(Mat::Ones(partition.cols(), a.rows()));
  ag::Var denom = ag::scale(ag::sum(a_type), 2.0);
  ag::Var ay = ag::matmul(a_type, y);
  ag::Var within = ag::div_scalar(ag::matmul(ag::transpose(y), ay), denom);
  ag::Var volume = ag::div_scalar(ag::matmul(ones, ay), denom);
  return ag::trace(ag::matmul(within, ag::log2_clamped(volume, kLogClamp)));
}

double structural_entropy_value(const Mat& a, const Mat& partition) {
  check_nonnegative(a);
  const double s = a.sum();
  if (s == 0.0) return 0.0;
  const Mat ay = a * partition;
  const Mat within = partition.transpose() * ay / (2.0 * s);
  const Mat volume = Mat::Ones(partition.cols(), a.rows()) * ay / (2.0 * s);
  const Mat logv = volume.cwiseMax(kLogClamp).array().log() / std::log(2.0);
  return (within * logv).trace();
}

double se_oracle(const Mat& a, const std::vector<std::vector<int>>& partition) {
  const double vol = a.sum();
  if (vol == 0.0) return 0.0;
  const Eigen::Index n = a.rows();
  double h = 0.0;
  for (const auto& part : partition) {
    if (part.empty()) continue;
    std::vector<char> inside(static_cast<std::size_t>(n), 0);
    for (int v : part) inside[v] = 1;
    double volume = 0.0, cut = 0.0;
    for (int i : part) {
      for (Eigen::Index j = 0; j < n; ++j) {
        volume += a(i, j);
        if (!inside[j]) cut += a(i, j);
      }
    }
    if (volume == 0.0) continue;
    h += -(cut / vol) * std::log2(volume / vol);
  }
  return h;
}

LossBundle total_loss(std::span<const double> ce_values, std::span<const double> se_values,
                      double gamma) {
  if (!(gamma >= 0.0)) throw NumericError("total_loss: gamma must be >= 0");
  LossBundle b;
  b.gamma = gamma;
  for (double v : ce_values) {
    if (!std::isfinite(v)) throw NumericError("total_loss: non-finite cross-entropy " + std::to_string(v));
    b.ce += v;
  }
  for (double v : se_values) {
    if (!std::isfinite(v)) throw NumericError("total_loss: non-finite structural entropy " + std::to_string(v));
  }
  if (!se_values.empty()) {
    b.se = std::accumulate(se_values.begin(), se_values.end(), 0.0) / static_cast<double>(se_values.size());
  }
  b.total = gamma == 0.0 ? b.ce : b.ce + gamma * b.se;
  if (!std::isfinite(b.total)) throw NumericError("total_loss: non-finite total");
  return b;
}

}  // namespace masgcn::objective
