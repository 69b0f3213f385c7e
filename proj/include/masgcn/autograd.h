#pragma once

// Reverse-mode differentiation over dense Eigen matrices.
//
// A Tape records every operation of one forward pass. Leaves are either
// constants or parameters identified by an integer slot; after backward()
// the parameter gradients are accumulated into a Gradients buffer. Each
// forward pass owns its own tape, so independent examples can be
// differentiated concurrently.

#include <deque>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "masgcn/common.h"

namespace masgcn::ag {

class Tape;

class Var {
 public:
  Var() = default;

  const Mat& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }

  Tape& tape() const { return *tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Parameter gradients. Dense slots hold a full gradient matrix; row slots
// hold sparse per-row gradients of embedding tables.
struct Gradients {
  std::vector<Mat> dense;
  std::vector<std::vector<std::pair<int, RowVec>>> rows;

  void resize(std::size_t num_params);
  void clear();
  // Adds `other` into this buffer, slot by slot.
  void accumulate(const Gradients& other);
  // Dense view of slot `param` for a table of the given shape.
  Mat densify(std::size_t param, Eigen::Index rows, Eigen::Index cols) const;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Mat value);
  // The referenced matrix must outlive the tape.
  Var parameter(int slot, const Mat& value);
  // Non-differentiable view of an external matrix; must outlive the tape.
  Var constant_ref(const Mat& value);

  // Records an op. `needs_grad` is derived from the inputs.
  Var record(Mat value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Mat value, std::span<const Var> inputs, Backward backward);

  // Records a differentiable node without tape inputs (e.g. a table lookup).
  Var record_source(Mat value, Backward backward);

  const Mat& value(int id) const;
  // Gradient of node `id`; zero-sized if it received none.
  const Mat& grad(int id) const { return nodes_[id].grad; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  void accumulate(int id, const Mat& g);
  void accumulate_rows(int slot, int row, const RowVec& g);

  // Seeds d(loss)/d(loss) = 1 and propagates. `loss` must be 1x1.
  void backward(Var loss, Gradients& out);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    const Mat* ref = nullptr;
    Mat grad;
    bool needs_grad = false;
    int slot = -1;
    Backward backward;
  };

  // Deque keeps value references stable while later nodes are appended.
  std::deque<Node> nodes_;
  std::vector<std::pair<int, std::pair<int, RowVec>>> row_grads_;
};

inline const Mat& Var::value() const { return tape_->value(id_); }

Var matmul(Var a, Var b);
// a * b^T
Var matmul_nt(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var cwise_mul(Var a, Var b);
Var scale(Var a, double c);
// Adds the 1x1 variable `s` to every entry of `a`.
Var add_scalar(Var a, Var s);
// Divides every entry of `a` by the 1x1 variable `s`.
Var div_scalar(Var a, Var s);
Var tanh(Var a);
Var relu(Var a);
Var softmax_rows(Var a);
// log2(max(a, eps)); no gradient flows through clamped entries.
Var log2_clamped(Var a, double eps);
Var sum(Var a);
Var mean(Var a);
Var trace(Var a);
// Mean of the selected rows, 1 x cols.
Var rows_mean(Var a, std::span<const int> rows);
// Repeats a 1 x C row n times.
Var broadcast_rows(Var row, Eigen::Index n);
Var concat_cols(Var a, Var b);
// out[r][c] = table(index(r,c) - 1, 0) where index(r,c) != 0, else 0.
// `table` is a column vector.
Var gather_ids(Var table, const IntMat& index);
// Stacks 1x1 variables into a column vector.
Var stack(std::span<const Var> scalars);
// Sum_i weights(i) * mats[i]; `weights` is a column vector.
Var weighted_sum(std::span<const Var> mats, Var weights);
// Entrywise product with a constant mask.
Var mask_mul(Var a, const Mat& mask);
// Rows of a parameter table; gradients are recorded sparsely per row.
Var lookup_rows(Tape& tape, int slot, const Mat& table, std::span<const int> ids);
// Negative log-softmax of a 1xK row at `label`.
Var cross_entropy(Var logits, int label);

// Unidirectional LSTM over the rows of x (one row per time step).
// Gate order in the stacked weights is input, forget, cell, output.
// w_x: 4h x E, w_h: 4h x h, bias: 4h x 1. Returns N x h; with `reverse`
// the sequence is consumed from the last row and outputs stay aligned.
Var lstm(Var x, Var w_x, Var w_h, Var bias, bool reverse);

}  // namespace masgcn::ag
