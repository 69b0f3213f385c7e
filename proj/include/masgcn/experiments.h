#pragma once

// Preparation, ablation, sweep and matrix export on top of train().

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "masgcn/archive.h"
#include "masgcn/config.h"
#include "masgcn/trainer.h"

namespace masgcn {

// Locates <data_dir>/<dataset>/{train,test}.jsonl, falling back to
// <data_dir>/{train,test}.jsonl.
std::pair<std::filesystem::path, std::filesystem::path> dataset_files(const std::filesystem::path& data_dir,
                                                                      const std::string& dataset);

struct PreparedData {
  FeatureArchive archive;
  Dataset train_raw;
  Dataset test_raw;
};

PreparedData prepare_archive(const std::string& dataset, const std::filesystem::path& data_dir, int num_views,
                             int max_rel_pos);

// Writes the archive to <out_root>/<dataset> and returns that directory.
std::filesystem::path prepare(const std::string& dataset, const std::filesystem::path& data_dir,
                              const std::filesystem::path& out_root, int num_views, int max_rel_pos);

// Same features with P masks rebuilt from the stored distances.
FeatureArchive with_num_views(const FeatureArchive& archive, int num_views);

struct ReportRow {
  std::string name;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double delta_accuracy = 0.0;  // relative to the first row
  double delta_macro_f1 = 0.0;
  int best_epoch = 0;
  std::string config_hash;
};

struct ExperimentReport {
  std::string kind;  // "ablation" or "sweep"
  std::string dataset;
  std::string param;  // sweeps only
  std::uint64_t seed = 0;
  std::vector<ReportRow> rows;

  nlohmann::json to_json() const;
  std::string table() const;
};

// Rows: full, w/o structural entropy (gamma = 0), w/o view gate (mean).
ExperimentReport ablate(const TrainConfig& config, const FeatureArchive& archive, const TrainOptions& opt);

// param is "P" or "gamma"; one trained model per value, same seed.
ExperimentReport sweep(const TrainConfig& config, const FeatureArchive& archive, const std::string& param,
                       const std::vector<double>& values, const TrainOptions& opt);

// Per-view A_sem / A_mask / A (rounded to 6 decimals) with token labels,
// plus the mean over views. Throws Error for an id outside the split.
nlohmann::json export_matrices(const Model& model, const FeatureArchive& archive, Split split, int id);

double round6(double x);

}  // namespace masgcn
