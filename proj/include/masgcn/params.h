#pragma once

#include <random>
#include <string>
#include <vector>

#include "masgcn/autograd.h"
#include "masgcn/common.h"

namespace masgcn {

struct Param {
  std::string name;
  Mat value;
  bool trainable = true;
  // Embedding tables receive sparse row gradients.
  bool row_sparse = false;
  // Row kept at zero and never updated (pad entries), or -1.
  int frozen_row = -1;
};

class ParamStore {
 public:
  int add(std::string name, Mat value, bool trainable = true, bool row_sparse = false,
          int frozen_row = -1);

  Param& operator[](int slot) { return params_.at(static_cast<std::size_t>(slot)); }
  const Param& operator[](int slot) const { return params_.at(static_cast<std::size_t>(slot)); }
  int size() const { return static_cast<int>(params_.size()); }
  // Throws if `name` is not registered.
  int slot(const std::string& name) const;

  std::vector<Param>& all() { return params_; }
  const std::vector<Param>& all() const { return params_; }

 private:
  std::vector<Param> params_;
};

// Binds parameters to a tape, one leaf per parameter.
class Binder {
 public:
  Binder(ag::Tape& tape, const ParamStore& store) : tape_(tape), store_(store) {}

  ag::Var operator()(int slot);
  ag::Tape& tape() { return tape_; }
  const ParamStore& store() const { return store_; }

 private:
  ag::Tape& tape_;
  const ParamStore& store_;
  std::vector<ag::Var> bound_;
};

Mat xavier_uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);
Mat uniform(Eigen::Index rows, Eigen::Index cols, double bound, std::mt19937_64& rng);

}  // namespace masgcn
