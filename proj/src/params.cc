#include "masgcn/params.h"

#include <cmath>

namespace masgcn {

int ParamStore::add(std::string name, Mat value, bool trainable, bool row_sparse, int frozen_row) {
  for (const auto& p : params_) {
    if (p.name == name) throw Error("duplicate parameter '" + name + "'");
  }
  if (frozen_row >= 0) value.row(frozen_row).setZero();
  params_.push_back(Param{std::move(name), std::move(value), trainable, row_sparse, frozen_row});
  return static_cast<int>(params_.size()) - 1;
}

int ParamStore::slot(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return static_cast<int>(i);
  }
  throw Error("unknown parameter '" + name + "'");
}

ag::Var Binder::operator()(int slot) {
  if (bound_.size() <= static_cast<std::size_t>(slot)) bound_.resize(slot + 1);
  ag::Var& v = bound_[slot];
  if (!v.valid()) {
    const Param& p = store_[slot];
    v = p.trainable ? tape_.parameter(slot, p.value) : tape_.constant_ref(p.value);
  }
  return v;
}

Mat uniform(Eigen::Index rows, Eigen::Index cols, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Mat m(rows, cols);
  // Column-major fill order is part of the seeded-init contract.
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
  }
  return m;
}

Mat xavier_uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return uniform(rows, cols, bound, rng);
}

}  // namespace masgcn
