#include "masgcn/autograd.h"

#include <cmath>
#include <memory>

namespace masgcn::ag {

void Gradients::resize(std::size_t num_params) {
  dense.resize(num_params);
  rows.resize(num_params);
}

void Gradients::clear() {
  for (auto& d : dense) d.resize(0, 0);
  for (auto& r : rows) r.clear();
}

void Gradients::accumulate(const Gradients& other) {
  if (dense.size() < other.dense.size()) resize(other.dense.size());
  for (std::size_t i = 0; i < other.dense.size(); ++i) {
    const Mat& g = other.dense[i];
    if (g.size() == 0) continue;
    if (dense[i].size() == 0) {
      dense[i] = g;
    } else {
      dense[i] += g;
    }
  }
  for (std::size_t i = 0; i < other.rows.size(); ++i) {
    rows[i].insert(rows[i].end(), other.rows[i].begin(), other.rows[i].end());
  }
}

Mat Gradients::densify(std::size_t param, Eigen::Index num_rows, Eigen::Index num_cols) const {
  Mat out = Mat::Zero(num_rows, num_cols);
  if (param < dense.size() && dense[param].size() != 0) out += dense[param];
  if (param < rows.size()) {
    for (const auto& [row, g] : rows[param]) out.row(row) += g;
  }
  return out;
}

Var Tape::constant(Mat value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::parameter(int slot, const Mat& value) {
  Node n;
  n.ref = &value;
  n.needs_grad = true;
  n.slot = slot;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant_ref(const Mat& value) {
  Node n;
  n.ref = &value;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Mat value, std::initializer_list<Var> inputs, Backward backward) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(backward));
}

Var Tape::record(Mat value, std::span<const Var> inputs, Backward backward) {
  Node n;
  n.value = std::move(value);
  for (const Var& v : inputs) {
    if (nodes_[v.id()].needs_grad) {
      n.needs_grad = true;
      break;
    }
  }
  if (n.needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record_source(Mat value, Backward backward) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

const Mat& Tape::value(int id) const {
  const Node& n = nodes_[id];
  return n.ref ? *n.ref : n.value;
}

void Tape::accumulate(int id, const Mat& g) {
  Node& n = nodes_[id];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::accumulate_rows(int slot, int row, const RowVec& g) {
  row_grads_.push_back({slot, {row, g}});
}

void Tape::backward(Var loss, Gradients& out) {
  if (loss.rows() != 1 || loss.cols() != 1) throw Error("backward: loss must be a 1x1 value");
  accumulate(loss.id(), Mat::Ones(1, 1));
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, id);
    if (n.slot >= 0) {
      if (out.dense.size() <= static_cast<std::size_t>(n.slot)) out.resize(n.slot + 1);
      Mat& d = out.dense[n.slot];
      if (d.size() == 0) {
        d = n.grad;
      } else {
        d += n.grad;
      }
    }
  }
  for (auto& [slot, rg] : row_grads_) {
    if (out.rows.size() <= static_cast<std::size_t>(slot)) out.resize(slot + 1);
    out.rows[slot].push_back(rg);
  }
  row_grads_.clear();
}

namespace {

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                std::to_string(b.cols()));
  }
}

int n_rows(const Var& v) { return static_cast<int>(v.rows()); }

}  // namespace

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw Error("matmul: inner dimension mismatch");
  Tape& t = a.tape();
  const int ia = a.id(), ib = b.id();
  return t.record(a.value() * b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    const Mat& g = t.grad(self);
    if (t.needs_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.needs_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

Var matmul_nt(Var a, Var b) {
  if (a.cols() != b.cols()) throw Error("matmul_nt: inner dimension mismatch");
  Tape& t = a.tape();
  const int ia = a.id(), ib = b.id();
  return t.record(a.value() * b.value().transpose(), {a, b}, [ia, ib](Tape& t, int self) {
    const Mat& g = t.grad(self);
    if (t.needs_grad(ia)) t.accumulate(ia, g * t.value(ib));
    if (t.needs_grad(ib)) t.accumulate(ib, g.transpose() * t.value(ia));
  });
}

Var transpose(Var a) {
  Tape& t = a.tape();
  const int ia = a.id();
  return t.record(a.value().transpose(), {a},
                  [ia](Tape& t, int self) { t.accumulate(ia, t.grad(self).transpose()); });
}

Var add(Var a, Var b) {
  check_same_shape(a, b, "add");
  Tape& t = a.tape();
  const int ia = a.id(), ib = b.id();
  return t.record(a.value() + b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, t.grad(self));
  });
}

Var sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  Tape& t = a.tape();
  const int ia = a.id(), ib = b.id();
  return t.record(a.value() - b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, -t.grad(self));
  });
}

Var cwise_mul(Var a, Var b) {
  check_same_shape(a, b, "cwise_mul");
  Tape& t = a.tape();
  const int ia = a.id(), ib = b.id();
  return t.record(a.value().cwiseProduct(b.value()), {a, b}, [ia, ib](Tape& t, int self) {
    const Mat& g = t.grad(self);
    if (t.needs_grad(ia)) t.accumulate(ia, g.cwiseProduct(t.value(ib)));
    if (t.needs_grad(ib)) t.accumulate(ib, g.cwiseProduct(t.value(ia)));
  });
}

Var scale(Var a, double c) {
  Tape& t = a.tape();
  const int ia = a.id();
  return t.record(a.value() * c, {a},
                  [ia, c](Tape& t, int self) { t.accumulate(ia, t.grad(self) * c); });
}

Var add_scalar(Var a, Var s) {
  if (s.rows() != 1 || s.cols() != 1) throw Error("add_scalar: expected a 1x1 scalar");
  Tape& t = a.tape();
  const int ia = a.id(), is = s.id();
  Mat out = a.value().array() + s.scalar();
  return t.record(std::move(out), {a, s}, [ia, is](Tape& t, int self) {
    const Mat& g = t.grad(self);
    t.accumulate(ia, g);
    if (t.needs_grad(is)) t.accumulate(is, Mat::Constant(1, 1, g.sum()));
  });
}

Var div_scalar(Var a, Var s) {
  if (s.rows() != 1 || s.cols() != 1) throw Error("div_scalar: expected a 1x1 scalar");
  Tape& t = a.tape();
  const int ia = a.id(), is = s.id();
  const double d = s.scalar();
  return t.record(a.value() / d, {a, s}, [ia, is, d](Tape& t, int self) {
    const Mat& g = t.grad(self);
    if (t.needs_grad(ia)) t.accumulate(ia, g / d);
    if (t.needs_grad(is)) {
      const double gs = -(g.cwiseProduct(t.value(ia))).sum() / (d * d);
      t.accumulate(is, Mat::Constant(1, 1, gs));
    }
  });
}

Var tanh(Var a) {
  Tape& t = a.tape();
  const int ia = a.id();
  Mat y = a.value().array().tanh();
  return t.record(std::move(y), {a}, [ia](Tape& t, int self) {
    const Mat& y = t.value(self);
    t.accumulate(ia, t.grad(self).cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var relu(Var a) {
  Tape& t = a.tape();
  const int ia = a.id();
  Mat y = a.value().cwiseMax(0.0);
  return t.record(std::move(y), {a}, [ia](Tape& t, int self) {
    const Mat& x = t.value(ia);
    t.accumulate(ia, (x.array() > 0.0).select(t.grad(self), 0.0));
  });
}

Var softmax_rows(Var a) {
  Tape& t = a.tape();
  const int ia = a.id();
  const Mat& x = a.value();
  Mat y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    y.row(r) = (x.row(r).array() - m).exp();
    y.row(r) /= y.row(r).sum();
  }
  return t.record(std::move(y), {a}, [ia](Tape& t, int self) {
    const Mat& y = t.value(self);
    const Mat& g = t.grad(self);
    Vec dot = g.cwiseProduct(y).rowwise().sum();
    Mat dx = y.cwiseProduct((g.colwise() - dot));
    t.accumulate(ia, dx);
  });
}

Var log2_clamped(Var a, double eps) {
  Tape& t = a.tape();
  const int ia = a.id();
  Mat y = a.value().cwiseMax(eps).array().log() / std::log(2.0);
  return t.record(std::move(y), {a}, [ia, eps](Tape& t, int self) {
    const Mat& x = t.value(ia);
    const Mat& g = t.grad(self);
    Mat dx = (x.array() > eps).select(g.array() / (x.array() * std::log(2.0)), 0.0);
    t.accumulate(ia, dx);
  });
}

Var sum(Var a) {
  Tape& t = a.tape();
  const int ia = a.id();
  return t.record(Mat::Constant(1, 1, a.value().sum()), {a}, [ia](Tape& t, int self) {
    const Mat& x = t.value(ia);
    t.accumulate(ia, Mat::Constant(x.rows(), x.cols(), t.grad(self)(0, 0)));
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  return scale(sum(a), 1.0 / n);
}

Var trace(Var a) {
  if (a.rows() != a.cols()) throw Error("trace: matrix is not square");
  Tape& t = a.tape();
  const int ia = a.id();
  return t.record(Mat::Constant(1, 1, a.value().trace()), {a}, [ia](Tape& t, int self) {
    const Mat& x = t.value(ia);
    t.accumulate(ia, Mat::Identity(x.rows(), x.cols()) * t.grad(self)(0, 0));
  });
}

Var rows_mean(Var a, std::span<const int> rows) {
  if (rows.empty()) throw Error("rows_mean: empty row selection");
  Tape& t = a.tape();
  const int ia = a.id();
  std::vector<int> sel(rows.begin(), rows.end());
  Mat out = Mat::Zero(1, a.cols());
  for (int r : sel) {
    if (r < 0 || r >= n_rows(a)) throw Error("rows_mean: row index out of range");
    out += a.value().row(r);
  }
  out /= static_cast<double>(sel.size());
  return t.record(std::move(out), {a}, [ia, sel](Tape& t, int self) {
    const Mat& x = t.value(ia);
    Mat dx = Mat::Zero(x.rows(), x.cols());
    const Mat g = t.grad(self) / static_cast<double>(sel.size());
    for (int r : sel) dx.row(r) += g;
    t.accumulate(ia, dx);
  });
}

Var broadcast_rows(Var row, Eigen::Index n) {
  if (row.rows() != 1) throw Error("broadcast_rows: expected a single row");
  Tape& t = row.tape();
  const int ir = row.id();
  Mat out = row.value().replicate(n, 1);
  return t.record(std::move(out), {row}, [ir](Tape& t, int self) {
    t.accumulate(ir, t.grad(self).colwise().sum());
  });
}

Var concat_cols(Var a, Var b) {
  if (a.rows() != b.rows()) throw Error("concat_cols: row count mismatch");
  Tape& t = a.tape();
  const int ia = a.id(), ib = b.id();
  const Eigen::Index ca = a.cols();
  Mat out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  return t.record(std::move(out), {a, b}, [ia, ib, ca](Tape& t, int self) {
    const Mat& g = t.grad(self);
    if (t.needs_grad(ia)) t.accumulate(ia, g.leftCols(ca));
    if (t.needs_grad(ib)) t.accumulate(ib, g.rightCols(g.cols() - ca));
  });
}

Var gather_ids(Var table, const IntMat& index) {
  if (table.cols() != 1) throw Error("gather_ids: table must be a column vector");
  Tape& t = table.tape();
  const int it = table.id();
  const Mat& tv = table.value();
  Mat out = Mat::Zero(index.rows(), index.cols());
  for (Eigen::Index r = 0; r < index.rows(); ++r) {
    for (Eigen::Index c = 0; c < index.cols(); ++c) {
      const int id = index(r, c);
      if (id == 0) continue;
      if (id < 1 || id > tv.rows()) throw Error("gather_ids: type id out of range");
      out(r, c) = tv(id - 1, 0);
    }
  }
  return t.record(std::move(out), {table}, [it, index](Tape& t, int self) {
    const Mat& g = t.grad(self);
    Mat dt = Mat::Zero(t.value(it).rows(), 1);
    for (Eigen::Index r = 0; r < index.rows(); ++r) {
      for (Eigen::Index c = 0; c < index.cols(); ++c) {
        if (index(r, c) != 0) dt(index(r, c) - 1, 0) += g(r, c);
      }
    }
    t.accumulate(it, dt);
  });
}

Var stack(std::span<const Var> scalars) {
  if (scalars.empty()) throw Error("stack: no inputs");
  Tape& t = scalars.front().tape();
  Mat out(static_cast<Eigen::Index>(scalars.size()), 1);
  std::vector<int> ids;
  ids.reserve(scalars.size());
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    out(static_cast<Eigen::Index>(i), 0) = scalars[i].scalar();
    ids.push_back(scalars[i].id());
  }
  return t.record(std::move(out), scalars, [ids](Tape& t, int self) {
    const Mat& g = t.grad(self);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      t.accumulate(ids[i], Mat::Constant(1, 1, g(static_cast<Eigen::Index>(i), 0)));
    }
  });
}

Var weighted_sum(std::span<const Var> mats, Var weights) {
  if (mats.empty()) throw Error("weighted_sum: no inputs");
  if (weights.cols() != 1 || weights.rows() != static_cast<Eigen::Index>(mats.size())) {
    throw Error("weighted_sum: weight vector does not match input count");
  }
  Tape& t = weights.tape();
  const Mat& w = weights.value();
  Mat out = Mat::Zero(mats.front().rows(), mats.front().cols());
  std::vector<Var> inputs(mats.begin(), mats.end());
  std::vector<int> ids;
  for (std::size_t i = 0; i < mats.size(); ++i) {
    if (mats[i].rows() != out.rows() || mats[i].cols() != out.cols()) {
      throw Error("weighted_sum: shape mismatch");
    }
    out += w(static_cast<Eigen::Index>(i), 0) * mats[i].value();
    ids.push_back(mats[i].id());
  }
  const int iw = weights.id();
  inputs.push_back(weights);
  return t.record(std::move(out), inputs, [ids, iw](Tape& t, int self) {
    const Mat& g = t.grad(self);
    const Mat& w = t.value(iw);
    Mat dw(w.rows(), 1);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      if (t.needs_grad(ids[i])) t.accumulate(ids[i], g * w(k, 0));
      dw(k, 0) = g.cwiseProduct(t.value(ids[i])).sum();
    }
    t.accumulate(iw, dw);
  });
}

Var mask_mul(Var a, const Mat& mask) {
  if (a.rows() != mask.rows() || a.cols() != mask.cols()) throw Error("mask_mul: shape mismatch");
  Tape& t = a.tape();
  const int ia = a.id();
  return t.record(a.value().cwiseProduct(mask), {a}, [ia, mask](Tape& t, int self) {
    t.accumulate(ia, t.grad(self).cwiseProduct(mask));
  });
}

Var lookup_rows(Tape& tape, int slot, const Mat& table, std::span<const int> ids) {
  Mat out(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows()) throw Error("lookup_rows: id out of range");
    out.row(static_cast<Eigen::Index>(i)) = table.row(ids[i]);
  }
  if (slot < 0) return tape.constant(std::move(out));
  std::vector<int> rows(ids.begin(), ids.end());
  return tape.record_source(std::move(out), [slot, rows](Tape& t, int self) {
    const Mat& g = t.grad(self);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      t.accumulate_rows(slot, rows[i], g.row(static_cast<Eigen::Index>(i)));
    }
  });
}

Var cross_entropy(Var logits, int label) {
  if (logits.rows() != 1) throw Error("cross_entropy: logits must be a row");
  if (label < 0 || label >= logits.cols()) throw Error("cross_entropy: label out of range");
  Tape& t = logits.tape();
  const int il = logits.id();
  const RowVec z = logits.value().row(0);
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  const double loss = lse - z(label);
  return t.record(Mat::Constant(1, 1, loss), {logits}, [il, label, lse](Tape& t, int self) {
    const Mat& z = t.value(il);
    Mat p = (z.array() - lse).exp();
    p(0, label) -= 1.0;
    t.accumulate(il, p * t.grad(self)(0, 0));
  });
}

namespace {

Mat sigmoid(const Mat& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

// Per-step activations kept for backpropagation through time.
struct LstmCache {
  Mat gates;   // N x 4h, post-activation, indexed by time step
  Mat cells;   // N x h
  Mat hidden;  // N x h
};

}  // namespace

Var lstm(Var x, Var w_x, Var w_h, Var bias, bool reverse) {
  const Eigen::Index h = w_h.cols();
  if (w_x.rows() != 4 * h || w_h.rows() != 4 * h || bias.rows() != 4 * h || bias.cols() != 1) {
    throw Error("lstm: weight shapes do not match hidden width");
  }
  if (w_x.cols() != x.cols()) throw Error("lstm: input width mismatch");
  Tape& t = x.tape();
  const Eigen::Index n = x.rows();

  auto cache = std::make_shared<LstmCache>();
  cache->gates.resize(n, 4 * h);
  cache->cells.resize(n, h);
  cache->hidden.resize(n, h);

  const Mat pre_x = x.value() * w_x.value().transpose();
  const Mat& wh = w_h.value();
  const RowVec b = bias.value().col(0).transpose();
  RowVec h_prev = RowVec::Zero(h);
  RowVec c_prev = RowVec::Zero(h);
  for (Eigen::Index step = 0; step < n; ++step) {
    const Eigen::Index tt = reverse ? n - 1 - step : step;
    RowVec pre = pre_x.row(tt) + h_prev * wh.transpose() + b;
    RowVec gi = sigmoid(pre.segment(0, h));
    RowVec gf = sigmoid(pre.segment(h, h));
    RowVec gg = pre.segment(2 * h, h).array().tanh();
    RowVec go = sigmoid(pre.segment(3 * h, h));
    RowVec c = gf.cwiseProduct(c_prev) + gi.cwiseProduct(gg);
    RowVec hv = go.cwiseProduct(RowVec(c.array().tanh()));
    cache->gates.row(tt) << gi, gf, gg, go;
    cache->cells.row(tt) = c;
    cache->hidden.row(tt) = hv;
    h_prev = hv;
    c_prev = c;
  }

  const int ix = x.id(), iwx = w_x.id(), iwh = w_h.id(), ib = bias.id();
  Mat out = cache->hidden;
  return t.record(std::move(out), {x, w_x, w_h, bias},
                  [ix, iwx, iwh, ib, h, n, reverse, cache](Tape& t, int self) {
    const Mat& dh_out = t.grad(self);
    const Mat& wh = t.value(iwh);
    Mat d_pre = Mat::Zero(n, 4 * h);
    Mat h_prev_rows = Mat::Zero(n, h);
    RowVec dh_next = RowVec::Zero(h);
    RowVec dc_next = RowVec::Zero(h);
    for (Eigen::Index step = n - 1; step >= 0; --step) {
      const Eigen::Index tt = reverse ? n - 1 - step : step;
      const bool first = step == 0;
      const Eigen::Index prev = reverse ? tt + 1 : tt - 1;
      RowVec c_prev = first ? RowVec::Zero(h) : RowVec(cache->cells.row(prev));
      if (!first) h_prev_rows.row(tt) = cache->hidden.row(prev);

      const RowVec gi = cache->gates.row(tt).segment(0, h);
      const RowVec gf = cache->gates.row(tt).segment(h, h);
      const RowVec gg = cache->gates.row(tt).segment(2 * h, h);
      const RowVec go = cache->gates.row(tt).segment(3 * h, h);
      const RowVec tc = cache->cells.row(tt).array().tanh();

      RowVec dh = dh_out.row(tt) + dh_next;
      RowVec dc = dh.cwiseProduct(go).cwiseProduct(RowVec(1.0 - tc.array().square())) + dc_next;
      RowVec d_o = dh.cwiseProduct(tc);
      RowVec d_i = dc.cwiseProduct(gg);
      RowVec d_g = dc.cwiseProduct(gi);
      RowVec d_f = dc.cwiseProduct(c_prev);
      dc_next = dc.cwiseProduct(gf);

      d_pre.row(tt) << d_i.cwiseProduct(RowVec(gi.array() * (1.0 - gi.array()))),
          d_f.cwiseProduct(RowVec(gf.array() * (1.0 - gf.array()))),
          d_g.cwiseProduct(RowVec(1.0 - gg.array().square())),
          d_o.cwiseProduct(RowVec(go.array() * (1.0 - go.array())));
      dh_next = d_pre.row(tt) * wh;
    }
    if (t.needs_grad(ix)) t.accumulate(ix, d_pre * t.value(iwx));
    if (t.needs_grad(iwx)) t.accumulate(iwx, d_pre.transpose() * t.value(ix));
    if (t.needs_grad(iwh)) t.accumulate(iwh, d_pre.transpose() * h_prev_rows);
    if (t.needs_grad(ib)) t.accumulate(ib, d_pre.colwise().sum().transpose());
  });
}

}  // namespace masgcn::ag
