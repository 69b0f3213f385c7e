#pragma once

// The full network: encoder -> semantic heads -> masked views -> gated GCN
// stack -> aspect pooling -> classifier, plus the structural-entropy term.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "masgcn/archive.h"
#include "masgcn/encoder.h"
#include "masgcn/params.h"
#include "masgcn/views.h"

namespace masgcn {

struct ModelConfig {
  int word_vocab = 2;
  int pos_vocab = 2;
  int num_types = 1;  // U
  int word_dim = 300;
  int pos_dim = 30;
  int position_dim = 30;
  int hidden_dim = 50;  // per direction; D = 2 * hidden_dim
  int num_views = 10;   // P
  int num_layers = 2;   // L
  int max_rel_pos = 40;
  double dropout = 0.7;
  views::GateMode gate_mode = views::GateMode::kLearned;
  bool freeze_word_embeddings = true;

  int input_dim() const { return word_dim + pos_dim + position_dim; }
  int model_dim() const { return 2 * hidden_dim; }
};

struct AttentionSlots {
  std::vector<int> w_a, w_k, w_q, w_key;
  int b_a = -1;
};

struct GnnSlots {
  std::vector<int> w, gate_w1, gate_w2;
};

struct ModelSlots {
  encoder::EncoderSlots encoder;
  AttentionSlots attention;
  int h_type = -1;
  int w_t = -1;
  GnnSlots gnn;
  int w_p = -1;
  int b_p = -1;
};

// Values of the intermediate matrices of one forward pass.
struct Trace {
  Mat h;
  std::vector<Mat> sem, mask, adj;
  Mat type_alpha;
  Mat type_matrix;
  std::vector<Mat> gates;  // per layer, P x 1
  Mat logits;
};

struct ForwardOptions {
  bool training = false;
  // Dropout source; required when training with dropout > 0.
  std::mt19937_64* rng = nullptr;
  bool record_trace = false;
};

struct ForwardOutput {
  ag::Var logits;
  ag::Var type_matrix;
  ag::Var se_loss;
  std::optional<Trace> trace;
};

class Model {
 public:
  Model() = default;
  Model(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const ModelSlots& slots() const { return slots_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // Replace the word table with pretrained rows; shape must match.
  void set_word_table(const Mat& table);

  ForwardOutput forward(ag::Tape& tape, const FeatureBundle& ex, const ForwardOptions& opt) const;

  // Eval-mode logits.
  RowVec predict_logits(const FeatureBundle& ex) const;

 private:
  void init(std::uint64_t seed);

  ModelConfig config_;
  ModelSlots slots_;
  ParamStore params_;
};

int argmax(const RowVec& logits);

}  // namespace masgcn
