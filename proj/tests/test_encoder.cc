#include <doctest.h>

#include <fstream>

#include "fixtures.h"
#include "masgcn/encoder.h"
#include "masgcn/kernels.h"

using namespace masgcn;

namespace {

struct EncoderRig {
  fx::Toy t = fx::toy(4, 3, 6, 2, 17);
  Model model{t.config, 5};
};

}  // namespace

TEST_CASE("position table indexing") {
  CHECK(encoder::position_table_rows(3) == 8);
  CHECK(encoder::position_index(-3, 3) == 1);
  CHECK(encoder::position_index(0, 3) == 4);
  CHECK(encoder::position_index(3, 3) == 7);
  CHECK(encoder::position_index(10, 3) == 7);
  CHECK(encoder::position_index(-10, 3) == 1);
}

TEST_CASE("embedding layout and encoder shapes") {
  EncoderRig r;
  const FeatureBundle& ex = r.t.bundles[0];
  const ModelConfig& c = r.t.config;
  ag::Tape tape;
  Binder bind(tape, r.model.params());
  const auto& slots = r.model.slots().encoder;
  ag::Var x = encoder::embed(bind, slots, ex.tok);
  CHECK(x.rows() == ex.tok.size());
  CHECK(x.cols() == c.input_dim());
  const Mat& words = r.model.params()[slots.word].value;
  for (int i = 0; i < ex.tok.size(); ++i) {
    CHECK(x.value().row(i).head(c.word_dim) == words.row(ex.tok.word_ids[i]));
  }
  auto aspect = ex.tok.aspect_indices();
  encoder::ContextualEncoding enc = encoder::encode(bind, slots, x, aspect, nullptr);
  CHECK(enc.h.rows() == ex.tok.size());
  CHECK(enc.h.cols() == c.model_dim());
  CHECK(enc.h_aspect.rows() == static_cast<Eigen::Index>(aspect.size()));
  RowVec mean = enc.h_aspect.value().colwise().mean();
  for (int i = 0; i < ex.tok.size(); ++i) CHECK((enc.h_aspect_hat.value().row(i) - mean).norm() < 1e-15);
  for (std::size_t k = 0; k < aspect.size(); ++k) CHECK(enc.h_aspect.value().row(k) == enc.h.value().row(aspect[k]));
}

TEST_CASE("eval mode is deterministic and dropout is confined to training") {
  EncoderRig r;
  const FeatureBundle& ex = r.t.bundles[1];
  RowVec a = r.model.predict_logits(ex);
  RowVec b = r.model.predict_logits(ex);
  CHECK(a == b);
  std::mt19937_64 rng(3);
  Mat m = encoder::dropout_mask(200, 50, 0.7, rng);
  const double kept = (m.array() != 0.0).cast<double>().mean();
  CHECK(kept == doctest::Approx(0.3).epsilon(0.05));
  CHECK(((m.array() == 0.0) || (m.array() - 1.0 / 0.3).abs() < 1e-12).all());
  std::mt19937_64 rng0(3);
  CHECK((encoder::dropout_mask(3, 3, 0.0, rng0).array() == 1.0).all());
}

TEST_CASE("recurrent weight gradients of sum(H) match finite differences") {
  EncoderRig r;
  const FeatureBundle& ex = r.t.bundles[2];
  const auto& slots = r.model.slots().encoder;
  auto sum_h = [&](ag::Gradients* g) {
    ag::Tape tape;
    Binder bind(tape, r.model.params());
    ag::Var x = encoder::embed(bind, slots, ex.tok);
    auto enc = encoder::encode(bind, slots, x, ex.tok.aspect_indices(), nullptr);
    ag::Var s = ag::sum(enc.h);
    if (g) {
      g->resize(static_cast<std::size_t>(r.model.params().size()));
      tape.backward(s, *g);
    }
    return s.scalar();
  };
  ag::Gradients g;
  sum_h(&g);
  std::mt19937_64 rng(9);
  int checked = 0;
  for (int slot : {slots.fw_wh, slots.bw_wh, slots.fw_wx, slots.bw_b}) {
    Mat& w = r.model.params()[slot].value;
    for (int k = 0; k < 10; ++k) {
      const int i = std::uniform_int_distribution<int>(0, static_cast<int>(w.rows()) - 1)(rng);
      const int j = std::uniform_int_distribution<int>(0, static_cast<int>(w.cols()) - 1)(rng);
      const double saved = w(i, j);
      w(i, j) = saved + 1e-6;
      const double up = sum_h(nullptr);
      w(i, j) = saved - 1e-6;
      const double down = sum_h(nullptr);
      w(i, j) = saved;
      CHECK(fx::rel_error(g.dense[slot](i, j), (up - down) / 2e-6) < 1e-4);
      ++checked;
    }
  }
  CHECK(checked == 40);
}

TEST_CASE("pretrained vectors") {
  fx::TempDir dir;
  std::vector<RawExample> exs = {fx::toy(1, 4, 4, 1, 1).raw[0]};
  exs[0].tokens = {"Food", "was", "really", "good"};
  Vocabularies v = build_vocabularies(exs);
  {
    std::ofstream out(dir / "vec.txt");
    out << "food 1 2 3\n";
    out << "was 4 5\n";
    out << "good 7 8 x\n";
    out << "really 0.5 0.25 -1\n";
    out << "unrelated 9 9 9\n";
  }
  std::mt19937_64 rng(1);
  auto t = encoder::load_pretrained_vectors(dir / "vec.txt", v.word, 3, rng);
  CHECK(t.found == 2);
  CHECK(t.skipped_lines == 2);
  CHECK(t.coverage == doctest::Approx(0.5));
  CHECK(t.table.row(v.word.id("food")) == (RowVec(3) << 1, 2, 3).finished());
  CHECK(t.table.row(v.word.id("really")) == (RowVec(3) << 0.5, 0.25, -1).finished());
  CHECK(t.table.row(Vocabulary::kPad).norm() == 0.0);
  CHECK(t.table.row(v.word.id("good")).cwiseAbs().maxCoeff() <= 0.25);

  {
    std::ofstream out(dir / "wrong.txt");
    out << "food 1 2\n";
  }
  CHECK_THROWS_AS(encoder::load_pretrained_vectors(dir / "wrong.txt", v.word, 3, rng), FormatError);
  CHECK_THROWS_AS(encoder::load_pretrained_vectors(dir / "none.txt", v.word, 3, rng), IoError);
}
