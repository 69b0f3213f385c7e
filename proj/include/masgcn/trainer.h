#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "masgcn/archive.h"
#include "masgcn/config.h"
#include "masgcn/metrics.h"
#include "masgcn/model.h"

namespace masgcn {

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;  // mean per-example total loss
  double train_ce = 0.0;    // mean per-example cross-entropy
  double train_se = 0.0;    // mean per-example structural entropy
  std::optional<double> train_accuracy;
  double test_accuracy = 0.0;
  double test_macro_f1 = 0.0;
  double seconds = 0.0;

  nlohmann::json to_json() const;
};

struct TrainOptions {
  // Write checkpoints and the JSON log under config.out_dir.
  bool write_outputs = true;
  bool verbose = true;
  bool use_omp = true;
  // Also score the training split in eval mode after every epoch.
  bool eval_train = false;
  // Stop once eval-mode train accuracy reaches this value (needs eval_train).
  std::optional<double> stop_at_train_accuracy;
  // Skip test evaluation (learnability runs).
  bool eval_test = true;
  // Run name used for output files; defaults to the dataset name.
  std::string run_name;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = 0;
  EvalReport best_test;
  Model best_model;
  Model final_model;
  std::string checkpoint_path;
};

// Builds the model for a config and archive, loading pretrained vectors
// when configured.
Model build_model(const TrainConfig& config, const FeatureArchive& archive);

// Aborts with ConfigError when the archive was built for other settings.
void check_archive_matches(const TrainConfig& config, const FeatureArchive& archive);

TrainResult train(const TrainConfig& config, const FeatureArchive& archive, const TrainOptions& opt);
// Loads the archive at config.feature_dir().
TrainResult train(const TrainConfig& config, const TrainOptions& opt);

EvalReport evaluate(const Model& model, std::span<const FeatureBundle> examples, bool use_omp = true);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

}  // namespace masgcn
