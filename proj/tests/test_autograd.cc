#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.h"
#include "masgcn/autograd.h"

using namespace masgcn;
using ag::Tape;
using ag::Var;

namespace {

using Build = std::function<Var(Tape&, std::vector<Var>&)>;

// Checks d/dx sum(f(x) .* R) against central differences for every input entry.
void check_gradients(const Build& f, std::vector<Mat> inputs, std::uint64_t seed = 1, double tol = 1e-6) {
  std::mt19937_64 rng(seed);
  Mat weights;
  auto loss_of = [&](const std::vector<Mat>& xs, ag::Gradients* grads) {
    Tape t;
    std::vector<Var> vars;
    for (std::size_t i = 0; i < xs.size(); ++i) vars.push_back(t.parameter(static_cast<int>(i), xs[i]));
    Var out = f(t, vars);
    if (weights.size() == 0) weights = uniform(out.rows(), out.cols(), 1.0, rng);
    Var loss = ag::sum(ag::mask_mul(out, weights));
    if (grads) {
      grads->resize(xs.size());
      t.backward(loss, *grads);
    }
    return loss.scalar();
  };
  ag::Gradients g;
  loss_of(inputs, &g);
  const double h = 1e-6;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    Mat analytic = g.densify(k, inputs[k].rows(), inputs[k].cols());
    for (Eigen::Index i = 0; i < inputs[k].size(); ++i) {
      std::vector<Mat> plus = inputs, minus = inputs;
      plus[k].data()[i] += h;
      minus[k].data()[i] -= h;
      const double numeric = (loss_of(plus, nullptr) - loss_of(minus, nullptr)) / (2 * h);
      INFO("input " << k << " entry " << i);
      CHECK(fx::rel_error(analytic.data()[i], numeric) < tol);
    }
  }
}

Mat rnd(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return uniform(r, c, 1.0, rng);
}

}  // namespace

TEST_CASE("frozen softmax values") {
  Tape t;
  Mat x(1, 2);
  x << 1.0, 2.0;
  Mat y = ag::softmax_rows(t.constant(x)).value();
  CHECK(y(0, 0) == doctest::Approx(0.268941421).epsilon(1e-9));
  CHECK(y(0, 1) == doctest::Approx(0.731058579).epsilon(1e-9));
  Mat big(1, 3);
  big << 0.0, kMaskSentinel, 0.0;
  Mat z = ag::softmax_rows(t.constant(big)).value();
  CHECK(z(0, 1) == 0.0);
  CHECK(z(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("binary operator gradients") {
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::matmul(v[0], v[1]); }, {rnd(3, 4, 1), rnd(4, 2, 2)});
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::matmul_nt(v[0], v[1]); }, {rnd(3, 4, 1), rnd(5, 4, 2)});
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::add(v[0], v[1]); }, {rnd(2, 3, 1), rnd(2, 3, 2)});
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::sub(v[0], v[1]); }, {rnd(2, 3, 1), rnd(2, 3, 2)});
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::cwise_mul(v[0], v[1]); }, {rnd(2, 3, 1), rnd(2, 3, 2)});
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::add_scalar(v[0], v[1]); }, {rnd(2, 3, 1), rnd(1, 1, 2)});
  Mat s = rnd(1, 1, 2).array() + 2.0;
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::div_scalar(v[0], v[1]); }, {rnd(2, 3, 1), s});
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::concat_cols(v[0], v[1]); }, {rnd(3, 2, 1), rnd(3, 4, 2)});
}

TEST_CASE("unary operator gradients") {
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::transpose(v[0]); }, {rnd(2, 3, 1)});
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::scale(v[0], -2.5); }, {rnd(2, 3, 1)});
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::tanh(v[0]); }, {rnd(3, 3, 1)});
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::relu(v[0]); }, {rnd(3, 3, 4)});
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::softmax_rows(v[0]); }, {rnd(3, 4, 1)});
  Mat pos = rnd(3, 3, 1).array().abs() + 0.1;
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::log2_clamped(v[0], 1e-12); }, {pos});
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::sum(v[0]); }, {rnd(3, 3, 1)});
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::mean(v[0]); }, {rnd(3, 2, 1)});
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::trace(v[0]); }, {rnd(3, 3, 1)});
  check_gradients(
      [](Tape&, std::vector<Var>& v) {
        std::vector<int> rows = {0, 2};
        return ag::rows_mean(v[0], rows);
      },
      {rnd(4, 3, 1)});
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::broadcast_rows(v[0], 4); }, {rnd(1, 3, 1)});
  check_gradients([](Tape&, std::vector<Var>& v) { return ag::cross_entropy(v[0], 1); }, {rnd(1, 3, 1)});
}

TEST_CASE("structured operator gradients") {
  IntMat idx(3, 3);
  idx << 0, 2, 1, 2, 0, 3, 1, 3, 0;
  check_gradients([&](Tape&, std::vector<Var>& v) { return ag::gather_ids(v[0], idx); }, {rnd(3, 1, 1)});
  check_gradients(
      [](Tape&, std::vector<Var>& v) {
        std::vector<Var> s = {ag::sum(v[0]), ag::mean(v[0])};
        return ag::stack(s);
      },
      {rnd(2, 2, 1)});
  check_gradients(
      [](Tape&, std::vector<Var>& v) {
        std::vector<Var> ms = {v[0], v[1]};
        return ag::weighted_sum(ms, v[2]);
      },
      {rnd(3, 2, 1), rnd(3, 2, 2), rnd(2, 1, 3)});
  Mat mask = rnd(2, 3, 9);
  check_gradients([&](Tape&, std::vector<Var>& v) { return ag::mask_mul(v[0], mask); }, {rnd(2, 3, 1)});
}

TEST_CASE("lstm gradients in both directions") {
  const int e = 3, h = 2, n = 4;
  for (bool reverse : {false, true}) {
    check_gradients([&](Tape&, std::vector<Var>& v) { return ag::lstm(v[0], v[1], v[2], v[3], reverse); },
                    {rnd(n, e, 1), rnd(4 * h, e, 2), rnd(4 * h, h, 3), rnd(4 * h, 1, 4)});
  }
}

TEST_CASE("lstm reverse direction reads the sequence backwards") {
  const int e = 2, h = 3, n = 5;
  Mat x = rnd(n, e, 1), wx = rnd(4 * h, e, 2), wh = rnd(4 * h, h, 3), b = rnd(4 * h, 1, 4);
  Tape t;
  Mat fw = ag::lstm(t.constant(x), t.constant(wx), t.constant(wh), t.constant(b), false).value();
  Mat xr = x.colwise().reverse();
  Mat bw = ag::lstm(t.constant(xr), t.constant(wx), t.constant(wh), t.constant(b), true).value();
  CHECK((fw - bw.colwise().reverse()).norm() < 1e-14);
}

TEST_CASE("lookup rows produces sparse row gradients") {
  Mat table = rnd(5, 3, 1);
  Tape t;
  std::vector<int> ids = {2, 0, 2};
  Var rows = ag::lookup_rows(t, 0, table, ids);
  CHECK(rows.value().row(0) == table.row(2));
  Var loss = ag::sum(rows);
  ag::Gradients g;
  g.resize(1);
  t.backward(loss, g);
  Mat dense = g.densify(0, 5, 3);
  CHECK(dense.row(2).sum() == doctest::Approx(6.0));
  CHECK(dense.row(0).sum() == doctest::Approx(3.0));
  CHECK(dense.row(1).norm() == 0.0);
}

TEST_CASE("clamped log passes no gradient") {
  Mat x(1, 2);
  x << 0.0, 0.5;
  Tape t;
  Var v = t.parameter(0, x);
  Var out = ag::sum(ag::log2_clamped(v, 1e-12));
  CHECK(out.scalar() == doctest::Approx(std::log2(1e-12) - 1.0));
  ag::Gradients g;
  g.resize(1);
  t.backward(out, g);
  CHECK(g.dense[0](0, 0) == 0.0);
  CHECK(g.dense[0](0, 1) == doctest::Approx(1.0 / (0.5 * std::log(2.0))));
}

TEST_CASE("constants receive no parameter gradient and gradients accumulate") {
  Mat a = rnd(2, 2, 1);
  Tape t;
  Var p = t.parameter(0, a);
  Var c = t.constant(a);
  Var loss = ag::sum(ag::add(ag::cwise_mul(p, c), p));
  ag::Gradients g;
  g.resize(2);
  t.backward(loss, g);
  CHECK((g.dense[0] - (a.array() + 1.0).matrix()).norm() < 1e-15);
  CHECK(g.dense[1].size() == 0);
  ag::Gradients twice = g;
  twice.accumulate(g);
  CHECK((twice.dense[0] - 2.0 * g.dense[0]).norm() < 1e-15);
}
