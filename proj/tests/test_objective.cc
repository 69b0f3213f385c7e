#include <doctest.h>

#include <cmath>

#include "fixtures.h"
#include "masgcn/objective.h"

using namespace masgcn;

namespace {

Mat random_symmetric(int n, std::mt19937_64& rng, double density = 0.6) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat a = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (u(rng) < density) a(i, j) = a(j, i) = 0.1 + u(rng);
  return a;
}

Mat one_hot(const std::vector<int>& cls, int u) {
  Mat y = Mat::Zero(static_cast<Eigen::Index>(cls.size()), u);
  for (std::size_t i = 0; i < cls.size(); ++i) y(static_cast<Eigen::Index>(i), cls[i]) = 1.0;
  return y;
}

// Trace form evaluated by plain loops: sum over classes of the row sums of
// the within-class block times log2 of the class volume, both over 2*sum(A).
double trace_form_loops(const Mat& a, const std::vector<int>& cls, int u) {
  double total = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) total += a(i, j);
  if (total == 0) return 0;
  std::vector<double> vol(u, 0.0), block_rows(u, 0.0);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      vol[cls[j]] += a(i, j);
      block_rows[cls[i]] += a(i, j);
    }
  double s = 0;
  for (int k = 0; k < u; ++k) {
    s += block_rows[k] / (2 * total) * std::log2(std::max(vol[k] / (2 * total), 1e-12));
  }
  return s;
}

// Second transcription of the two-level structural entropy.
double se_direct(const Mat& a, const std::vector<std::vector<int>>& parts) {
  const int n = static_cast<int>(a.rows());
  std::vector<double> degree(n, 0.0);
  double vol = 0;
  for (int i = 0; i < n; ++i) {
    degree[i] = a.row(i).sum();
    vol += degree[i];
  }
  if (vol == 0) return 0;
  double h = 0;
  for (const auto& part : parts) {
    std::vector<char> in(n, 0);
    for (int v : part) in[v] = 1;
    double v_a = 0, g_a = 0;
    for (int i = 0; i < n; ++i) {
      if (!in[i]) continue;
      v_a += degree[i];
      for (int j = 0; j < n; ++j)
        if (!in[j]) g_a += a(i, j);
    }
    if (v_a > 0) h -= g_a / vol * std::log2(v_a / vol);
  }
  return h;
}

}  // namespace

TEST_CASE("two-node single-class fixture") {
  Mat a(2, 2);
  a << 0, 1, 1, 0;
  Mat y = Mat::Ones(2, 1);
  CHECK(std::abs(objective::structural_entropy_value(a, y) - (-0.5)) < 1e-9);
  ag::Tape t;
  CHECK(std::abs(objective::structural_entropy_loss(t.constant(a), y).scalar() + 0.5) < 1e-9);
}

TEST_CASE("empty graph returns zero and negative entries are fatal") {
  ag::Tape t;
  CHECK(objective::structural_entropy_loss(t.constant(Mat::Zero(1, 1)), Mat::Ones(1, 2)).scalar() == 0.0);
  Mat neg(2, 2);
  neg << 0, -1, -1, 0;
  CHECK_THROWS_AS(objective::structural_entropy_loss(t.constant(neg), Mat::Ones(2, 1)), NumericError);
}

TEST_CASE("trace form equals its loop transcription and is scale invariant") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 9)(rng);
    const int u = std::uniform_int_distribution<int>(1, 5)(rng);
    Mat a = random_symmetric(n, rng);
    std::vector<int> cls(n);
    for (auto& c : cls) c = std::uniform_int_distribution<int>(0, u - 1)(rng);
    Mat y = one_hot(cls, u);
    const double v = objective::structural_entropy_value(a, y);
    CHECK(std::abs(v - trace_form_loops(a, cls, u)) < 1e-12);
    ag::Tape t;
    CHECK(objective::structural_entropy_loss(t.constant(a), y).scalar() == doctest::Approx(v).epsilon(1e-14));
    for (double c : {1e-3, 0.5, 7.0, 1e4}) {
      CHECK(std::abs(objective::structural_entropy_value(c * a, y) - v) < 1e-9);
    }
  }
}

TEST_CASE("structural entropy gradient matches finite differences") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 5;
    Mat a = random_symmetric(n, rng, 1.0);
    std::vector<int> cls = {0, 1, 1, 2, 0};
    Mat y = one_hot(cls, 3);
    ag::Tape t;
    ag::Var v = t.parameter(0, a);
    ag::Var loss = objective::structural_entropy_loss(v, y);
    ag::Gradients g;
    g.resize(1);
    t.backward(loss, g);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        // Diagonal entries are zero; perturbing below zero leaves the domain.
        if (i == j) continue;
        Mat up = a, down = a;
        up(i, j) += 1e-6;
        down(i, j) -= 1e-6;
        const double num =
            (objective::structural_entropy_value(up, y) - objective::structural_entropy_value(down, y)) / 2e-6;
        CHECK(fx::rel_error(g.dense[0](i, j), num) < 1e-4);
      }
  }
}

TEST_CASE("structural entropy oracle") {
  Mat cliques = Mat::Zero(4, 4);
  cliques(0, 1) = cliques(1, 0) = 1;
  cliques(2, 3) = cliques(3, 2) = 1;
  CHECK(objective::se_oracle(cliques, {{0, 1}, {2, 3}}) == 0.0);
  std::mt19937_64 rng(4);
  Mat a = random_symmetric(6, rng);
  CHECK(objective::se_oracle(a, {{0, 1, 2, 3, 4, 5}}) == 0.0);
  CHECK(objective::se_oracle(a, {{0, 1, 2, 3, 4, 5}, {}}) == 0.0);
  for (int trial = 0; trial < 100; ++trial) {
    Mat b = random_symmetric(6, rng);
    std::vector<std::vector<int>> parts(3);
    for (int v = 0; v < 6; ++v) parts[std::uniform_int_distribution<int>(0, 2)(rng)].push_back(v);
    CHECK(std::abs(objective::se_oracle(b, parts) - se_direct(b, parts)) < 1e-9);
    CHECK(objective::se_oracle(b, parts) >= 0.0);
  }
}

TEST_CASE("classifier and cross-entropy") {
  ag::Tape t;
  Mat h = Mat::Random(4, 5);
  std::vector<int> one = {2};
  ag::Var zero = objective::classify(t.constant(h), one, t.constant(Mat::Zero(5, 3)), t.constant(Mat::Zero(1, 3)));
  CHECK(zero.value().norm() == 0.0);
  CHECK(objective::cross_entropy(zero, 1).scalar() == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  Mat wp = Mat::Random(5, 3);
  Mat bp = Mat::Random(1, 3);
  Mat logits = objective::classify(t.constant(h), one, t.constant(wp), t.constant(bp)).value();
  CHECK((logits - (h.row(2) * wp + bp)).norm() < 1e-15);
  std::vector<int> two = {1, 3};
  Mat pooled = objective::classify(t.constant(h), two, t.constant(wp), t.constant(bp)).value();
  CHECK((pooled - ((h.row(1) + h.row(3)) / 2.0 * wp + bp)).norm() < 1e-14);
  CHECK_THROWS(objective::classify(t.constant(h), std::vector<int>{}, t.constant(wp), t.constant(bp)));

  Mat l(1, 3);
  l << 0.2, -1.3, 2.0;
  const double ce = objective::cross_entropy(t.constant(l), 0).scalar();
  Mat shifted = l.array() + 123.0;
  CHECK(objective::cross_entropy(t.constant(shifted), 0).scalar() == doctest::Approx(ce).epsilon(1e-12));
  Mat sat(1, 3);
  sat << 1e6, 0, 0;
  CHECK(objective::cross_entropy(t.constant(sat), 0).scalar() < 1e-12);
}

TEST_CASE("combined objective") {
  std::vector<double> ce = {0.4, 0.6}, se = {-0.5, -0.5};
  auto b = objective::total_loss(ce, se, 0.01);
  CHECK(b.ce == doctest::Approx(1.0));
  CHECK(b.se == doctest::Approx(-0.5));
  CHECK(b.total == doctest::Approx(0.995).epsilon(1e-14));
  auto z = objective::total_loss(ce, se, 0.0);
  CHECK(z.total == z.ce);
  std::vector<double> bad = {std::nan("")};
  std::vector<double> ok = {0.0};
  CHECK_THROWS_AS(objective::total_loss(bad, ok, 0.01), NumericError);
  CHECK_THROWS_AS(objective::total_loss(ok, ok, -1.0), NumericError);
}
