#include "masgcn/optimizer.h"

#include <cmath>

namespace masgcn {

Adam::Adam(const ParamStore& params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params.all()) {
    if (p.trainable) {
      m_.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
    } else {
      m_.emplace_back();
      v_.emplace_back();
    }
  }
}

void Adam::step(ParamStore& params, const ag::Gradients& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (int i = 0; i < params.size(); ++i) {
    Param& p = params[i];
    if (!p.trainable) continue;
    const auto slot = static_cast<std::size_t>(i);
    const bool has_dense = slot < grads.dense.size() && grads.dense[slot].size() != 0;
    const bool has_rows = slot < grads.rows.size() && !grads.rows[slot].empty();
    if (!has_dense && !has_rows) continue;
    Mat g = grads.densify(slot, p.value.rows(), p.value.cols());
    if (p.frozen_row >= 0) g.row(p.frozen_row).setZero();
    m_[slot] = beta1_ * m_[slot] + (1.0 - beta1_) * g;
    v_[slot] = beta2_ * v_[slot] + (1.0 - beta2_) * g.cwiseProduct(g);
    p.value.array() -= lr_ * (m_[slot].array() / bc1) / ((v_[slot].array() / bc2).sqrt() + eps_);
    if (p.frozen_row >= 0) p.value.row(p.frozen_row).setZero();
  }
}

}  // namespace masgcn
