#pragma once

#include <vector>

#include "masgcn/autograd.h"
#include "masgcn/params.h"

namespace masgcn {

class Adam {
 public:
  Adam(const ParamStore& params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  // One update from accumulated gradients; untrainable parameters and
  // frozen rows are left untouched.
  void step(ParamStore& params, const ag::Gradients& grads);
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Mat> m_, v_;
};

}  // namespace masgcn
