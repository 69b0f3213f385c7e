#include "fixtures.h"

#include <algorithm>
#include <numeric>

#include "masgcn/kernels.h"
#include "masgcn/objective.h"

namespace fx {

std::vector<int> random_heads(int n, std::mt19937_64& rng) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> heads(n, -1);
  for (int k = 1; k < n; ++k) {
    heads[order[k]] = order[std::uniform_int_distribution<int>(0, k - 1)(rng)];
  }
  return heads;
}

RawExample random_example(int n, std::mt19937_64& rng) {
  static const std::vector<std::string> words = {"The", "food", "was", "great", "but", "service", "slow",
                                                 "and", "staff", "rude", "menu", "ok", "Price", "fine"};
  static const std::vector<std::string> tags = {"DT", "NN", "VBD", "JJ", "CC", "RB"};
  static const std::vector<std::string> rels = {"det", "nsubj", "amod", "cc", "conj", "advmod", "obj"};
  auto pick = [&](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  RawExample ex;
  ex.heads = random_heads(n, rng);
  for (int i = 0; i < n; ++i) {
    ex.tokens.push_back(pick(words));
    ex.pos_tags.push_back(pick(tags));
    ex.dep_labels.push_back(ex.heads[i] == -1 ? "root" : pick(rels));
  }
  ex.aspect_from = std::uniform_int_distribution<int>(0, n - 1)(rng);
  ex.aspect_to = std::uniform_int_distribution<int>(ex.aspect_from + 1, std::min(n, ex.aspect_from + 3))(rng);
  ex.polarity = static_cast<Polarity>(std::uniform_int_distribution<int>(0, 2)(rng));
  return ex;
}

IntMat floyd_warshall(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size());
  const int inf = 1 << 20;
  IntMat d = IntMat::Constant(n, n, inf);
  for (int i = 0; i < n; ++i) {
    d(i, i) = 0;
    if (heads[i] >= 0) d(i, heads[i]) = d(heads[i], i) = 1;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
  return d;
}

Toy toy(int count, int min_n, int max_n, int num_views, std::uint64_t seed, int num_layers) {
  std::mt19937_64 rng(seed);
  Toy t;
  for (int i = 0; i < count; ++i) {
    t.raw.push_back(random_example(std::uniform_int_distribution<int>(min_n, max_n)(rng), rng));
  }
  t.vocabs = build_vocabularies(t.raw);
  for (const auto& ex : t.raw) t.bundles.push_back(make_bundle(ex, t.vocabs, num_views, 5));
  ModelConfig& c = t.config;
  c.word_vocab = t.vocabs.word.size();
  c.pos_vocab = t.vocabs.pos.size();
  c.num_types = t.vocabs.dep_type.num_types();
  c.word_dim = 5;
  c.pos_dim = 3;
  c.position_dim = 3;
  c.hidden_dim = 4;
  c.num_views = num_views;
  c.num_layers = num_layers;
  c.max_rel_pos = 5;
  c.dropout = 0.0;
  c.freeze_word_embeddings = false;
  return t;
}

MetricOracle metric_oracle(const std::vector<int>& gold, const std::vector<int>& pred) {
  MetricOracle o;
  const double n = static_cast<double>(gold.size());
  double correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) correct += gold[i] == pred[i];
  o.accuracy = n > 0 ? correct / n : 0.0;
  double sum = 0;
  for (int c = 0; c < 3; ++c) {
    double tp = 0, gold_c = 0, pred_c = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (gold[i] == c && pred[i] == c) tp += 1;
      if (gold[i] == c) gold_c += 1;
      if (pred[i] == c) pred_c += 1;
    }
    // F1 = 2tp / (|gold| + |pred|), 0 when both are empty.
    o.f1[c] = gold_c + pred_c > 0 ? 2 * tp / (gold_c + pred_c) : 0.0;
    sum += o.f1[c];
  }
  o.macro_f1 = sum / 3.0;
  return o;
}

double rel_error(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6}); }

double example_loss(const Model& model, const FeatureBundle& ex, double gamma) {
  ag::Tape tape;
  ForwardOutput out = model.forward(tape, ex, ForwardOptions{});
  double ce = objective::cross_entropy(out.logits, ex.tok.label_id).scalar();
  return gamma == 0.0 ? ce : ce + gamma * out.se_loss.scalar();
}

TempDir::TempDir() {
  static int counter = 0;
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("masgcn_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace fx

namespace fx {

std::vector<FdEntry> model_fd_check(Model& model, const FeatureBundle& ex, double gamma,
                                    const std::vector<std::string>& names, int per_param, std::uint64_t seed,
                                    double step) {
  kernels::ExampleGrad g = kernels::example_gradient(model, ex, false, 0, gamma);
  std::mt19937_64 rng(seed);
  std::vector<FdEntry> out;
  for (const auto& name : names) {
    const int slot = model.params().slot(name);
    Param& p = model.params()[slot];
    Mat analytic = g.grads.densify(static_cast<std::size_t>(slot), p.value.rows(), p.value.cols());
    for (int k = 0; k < per_param; ++k) {
      FdEntry e;
      e.param = name;
      e.row = std::uniform_int_distribution<int>(0, static_cast<int>(p.value.rows()) - 1)(rng);
      e.col = std::uniform_int_distribution<int>(0, static_cast<int>(p.value.cols()) - 1)(rng);
      double& w = p.value(e.row, e.col);
      const double saved = w;
      w = saved + step;
      const double up = example_loss(model, ex, gamma);
      w = saved - step;
      const double down = example_loss(model, ex, gamma);
      w = saved;
      e.analytic = analytic(e.row, e.col);
      e.numeric = (up - down) / (2 * step);
      e.rel = rel_error(e.analytic, e.numeric);
      out.push_back(e);
    }
  }
  return out;
}

}  // namespace fx

#include "masgcn/synthetic.h"

namespace fx {

FeatureArchive synthetic_archive(int train_n, int test_n, int num_views, std::uint64_t seed,
                                 const std::string& dataset, int max_rel_pos) {
  SyntheticOptions o;
  o.count = train_n;
  o.seed = seed;
  auto train = synthetic_corpus(o);
  o.count = test_n;
  o.seed = seed + 1000;
  auto test = synthetic_corpus(o);
  ArchiveMeta meta;
  meta.dataset = dataset;
  meta.num_views = num_views;
  meta.max_rel_pos = max_rel_pos;
  meta.source_digest = sha256_hex("synthetic:" + std::to_string(seed));
  return build_archive(meta, build_vocabularies(train), train, test);
}

TrainConfig small_config(const std::filesystem::path& out_dir, const std::string& dataset) {
  TrainConfig c;
  c.dataset = dataset;
  c.out_dir = out_dir.string();
  c.cache_dir = (out_dir / "cache").string();
  c.word_dim = 8;
  c.pos_dim = 4;
  c.position_dim = 4;
  c.hidden_dim = 6;
  c.num_views = 3;
  c.max_rel_pos = 40;
  c.epochs = 2;
  c.batch_size = 8;
  c.freeze_word_embeddings = false;
  return c;
}

}  // namespace fx
