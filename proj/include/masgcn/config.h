#pragma once

// Training configuration. Serialized as a flat JSON object; unknown keys
// are rejected. Documented keys and defaults:
//
//   dataset                 "restaurant14"  dataset name (cache subdirectory)
//   cache_dir               "cache"         feature archive root; overridden
//                                           by $MASGCN_CACHE_DIR
//   out_dir                 "runs"          checkpoints, logs, reports
//   embedding_path          ""              pretrained word vectors (text)
//   num_views               10              P: views = attention heads = masks
//   num_layers              2               L: GCN layers
//   batch_size              16
//   learning_rate           0.002           Adam
//   adam_beta1/beta2/eps    0.9/0.999/1e-8
//   dropout                 0.7             on input embeddings
//   gamma                   0.01            structural-entropy weight
//   hidden_dim              50              per LSTM direction (D = 100)
//   word_dim/pos_dim/position_dim  300/30/30
//   max_rel_pos             40
//   seed                    42
//   epochs                  50
//   train_subset            0               use only the first n train examples
//   disable_se_loss         false           ablation: gamma forced to 0
//   disable_view_gate       false           ablation: mean over views
//   normalize_gates         false           softmax over gate values
//   freeze_word_embeddings  true
//   threads                 0               0 = OpenMP default
//   device                  "cpu"           only "cpu"
//   precision               "float64"       only "float64"

#include <cstdint>
#include <string>

#include <json.hpp>

#include "masgcn/model.h"

namespace masgcn {

struct TrainConfig {
  std::string dataset = "restaurant14";
  std::string cache_dir = "cache";
  std::string out_dir = "runs";
  std::string embedding_path;
  int num_views = 10;
  int num_layers = 2;
  int batch_size = 16;
  double learning_rate = 0.002;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double dropout = 0.7;
  double gamma = 0.01;
  int hidden_dim = 50;
  int word_dim = 300;
  int pos_dim = 30;
  int position_dim = 30;
  int max_rel_pos = 40;
  std::uint64_t seed = 42;
  int epochs = 50;
  int train_subset = 0;
  bool disable_se_loss = false;
  bool disable_view_gate = false;
  bool normalize_gates = false;
  bool freeze_word_embeddings = true;
  int threads = 0;
  std::string device = "cpu";
  std::string precision = "float64";

  // Throws ConfigError on out-of-range values.
  void validate() const;
  double effective_gamma() const { return disable_se_loss ? 0.0 : gamma; }
  views::GateMode gate_mode() const;

  nlohmann::json to_json() const;
  // Rejects unknown keys and wrong types; missing keys keep defaults.
  static TrainConfig from_json(const nlohmann::json& j);
  static TrainConfig load(const std::string& path);
  void save(const std::string& path) const;

  // SHA-256 over every field that can change results (paths to outputs and
  // the thread count are excluded).
  std::string hash() const;

  // cache_dir/dataset, honoring $MASGCN_CACHE_DIR.
  std::string feature_dir() const;

  ModelConfig model_config(const Vocabularies& vocabs) const;

  bool operator==(const TrainConfig&) const = default;
};

}  // namespace masgcn
