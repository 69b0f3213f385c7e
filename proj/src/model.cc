#include "masgcn/model.h"
#include <cmath>

#include "masgcn/objective.h"

namespace masgcn {

Model::Model(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  if (config_.num_views < 1) throw ConfigError("num_views must be >= 1");
  if (config_.num_layers < 1) throw ConfigError("num_layers must be >= 1");
  if (config_.num_types < 1) throw ConfigError("dependency type vocabulary is empty");
  init(seed);
}

void Model::init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const ModelConfig& c = config_;
  const int d = c.model_dim();
  const int h = c.hidden_dim;
  const int p = c.num_views;

  auto& e = slots_.encoder;
  e.max_rel_pos = c.max_rel_pos;
  e.word = params_.add("embed.word", uniform(c.word_vocab, c.word_dim, 0.25, rng),
                       !c.freeze_word_embeddings, true, Vocabulary::kPad);
  e.pos = params_.add("embed.pos", uniform(c.pos_vocab, c.pos_dim, 0.25, rng), true, true,
                      Vocabulary::kPad);
  e.position = params_.add("embed.position",
                           uniform(encoder::position_table_rows(c.max_rel_pos), c.position_dim, 0.25, rng),
                           true, true, 0);
  const double lb = 1.0 / std::sqrt(static_cast<double>(h));
  e.fw_wx = params_.add("lstm.fw.w_x", uniform(4 * h, c.input_dim(), lb, rng));
  e.fw_wh = params_.add("lstm.fw.w_h", uniform(4 * h, h, lb, rng));
  e.fw_b = params_.add("lstm.fw.b", uniform(4 * h, 1, lb, rng));
  e.bw_wx = params_.add("lstm.bw.w_x", uniform(4 * h, c.input_dim(), lb, rng));
  e.bw_wh = params_.add("lstm.bw.w_h", uniform(4 * h, h, lb, rng));
  e.bw_b = params_.add("lstm.bw.b", uniform(4 * h, 1, lb, rng));

  auto& a = slots_.attention;
  for (int i = 0; i < p; ++i) {
    const std::string k = std::to_string(i);
    a.w_a.push_back(params_.add("attn.w_a." + k, xavier_uniform(d, d, rng)));
    a.w_k.push_back(params_.add("attn.w_k." + k, xavier_uniform(d, d, rng)));
    a.w_q.push_back(params_.add("attn.w_q." + k, xavier_uniform(d, d, rng)));
    a.w_key.push_back(params_.add("attn.w_key." + k, xavier_uniform(d, d, rng)));
  }
  a.b_a = params_.add("attn.b_a", Mat::Zero(1, 1));

  slots_.h_type = params_.add("type.h_type", xavier_uniform(c.num_types, d, rng));
  slots_.w_t = params_.add("type.w_t", xavier_uniform(d, 1, rng));

  for (int l = 0; l < c.num_layers; ++l) {
    const std::string k = std::to_string(l);
    slots_.gnn.w.push_back(params_.add("gcn.w." + k, xavier_uniform(d, d, rng)));
    slots_.gnn.gate_w1.push_back(params_.add("gate.w1." + k, xavier_uniform(p, p, rng)));
    slots_.gnn.gate_w2.push_back(params_.add("gate.w2." + k, xavier_uniform(p, p, rng)));
  }
  slots_.w_p = params_.add("cls.w_p", xavier_uniform(d, kNumClasses, rng));
  slots_.b_p = params_.add("cls.b_p", Mat::Zero(1, kNumClasses));
}

void Model::set_word_table(const Mat& table) {
  Param& p = params_[slots_.encoder.word];
  if (table.rows() != p.value.rows() || table.cols() != p.value.cols()) {
    throw Error("set_word_table: shape mismatch");
  }
  p.value = table;
  p.value.row(Vocabulary::kPad).setZero();
}

ForwardOutput Model::forward(ag::Tape& tape, const FeatureBundle& ex, const ForwardOptions& opt) const {
  const ModelConfig& c = config_;
  const auto& syn = ex.syn;
  if (static_cast<int>(syn.masks.size()) != c.num_views) {
    throw Error("forward: feature bundle has " + std::to_string(syn.masks.size()) + " masks, model expects " +
                std::to_string(c.num_views));
  }
  Binder bind(tape, params_);
  const std::vector<int> aspect = ex.tok.aspect_indices();

  ag::Var x = encoder::embed(bind, slots_.encoder, ex.tok);
  Mat drop;
  const bool use_dropout = opt.training && c.dropout > 0.0;
  if (use_dropout) {
    if (!opt.rng) throw Error("forward: training with dropout needs an rng");
    drop = encoder::dropout_mask(x.rows(), x.cols(), c.dropout, *opt.rng);
  }
  encoder::ContextualEncoding enc = encoder::encode(bind, slots_.encoder, x, aspect, use_dropout ? &drop : nullptr);

  const auto& att = slots_.attention;
  std::vector<ag::Var> sem;
  sem.reserve(c.num_views);
  for (int i = 0; i < c.num_views; ++i) {
    ag::Var asp = views::aspect_attention(enc, bind(att.w_a[i]), bind(att.w_k[i]), bind(att.b_a));
    ag::Var self = views::self_attention(enc, bind(att.w_q[i]), bind(att.w_key[i]));
    sem.push_back(views::semantic_matrix(asp, self));
  }
  views::TypeAttention ta = views::type_attention(syn.type0, bind(slots_.h_type), bind(slots_.w_t));
  views::ViewAdjacencies adj = views::assemble_views(sem, syn.masks, ta.matrix);

  ag::Var h = enc.h;
  std::vector<ag::Var> gates;
  for (int l = 0; l < c.num_layers; ++l) {
    ag::Var w1, w2;
    if (c.gate_mode != views::GateMode::kMean) {
      w1 = bind(slots_.gnn.gate_w1[l]);
      w2 = bind(slots_.gnn.gate_w2[l]);
    }
    views::LayerOutput lo = views::gcn_layer(h, adj.adj, bind(slots_.gnn.w[l]), w1, w2, c.gate_mode);
    h = lo.h;
    gates.push_back(lo.gate);
  }

  ForwardOutput out;
  out.logits = objective::classify(h, aspect, bind(slots_.w_p), bind(slots_.b_p));
  out.type_matrix = ta.matrix;
  out.se_loss = objective::structural_entropy_loss(ta.matrix, syn.partition);
  if (opt.record_trace) {
    Trace t;
    t.h = enc.h.value();
    for (int i = 0; i < c.num_views; ++i) {
      t.sem.push_back(adj.sem[i].value());
      t.mask.push_back(adj.mask[i].value());
      t.adj.push_back(adj.adj[i].value());
    }
    t.type_alpha = ta.alpha.value();
    t.type_matrix = ta.matrix.value();
    for (const auto& g : gates) t.gates.push_back(g.value());
    t.logits = out.logits.value();
    out.trace = std::move(t);
  }
  return out;
}

RowVec Model::predict_logits(const FeatureBundle& ex) const {
  ag::Tape tape;
  ForwardOutput out = forward(tape, ex, ForwardOptions{});
  return out.logits.value().row(0);
}

int argmax(const RowVec& logits) {
  Eigen::Index i = 0;
  logits.maxCoeff(&i);
  return static_cast<int>(i);
}

}  // namespace masgcn
