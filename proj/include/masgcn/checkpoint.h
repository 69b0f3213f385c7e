#pragma once

#include <filesystem>

#include <json.hpp>

#include "masgcn/config.h"
#include "masgcn/model.h"

namespace masgcn {

struct Checkpoint {
  TrainConfig config;
  ModelConfig model_config;
  Model model;
  int epoch = 0;
  // Free-form metadata (metrics at save time, feature hash).
  nlohmann::json info = nlohmann::json::object();
};

nlohmann::json model_config_to_json(const ModelConfig& m);
ModelConfig model_config_from_json(const nlohmann::json& j);

// Parameters are stored as raw float64 so a round trip is bit-exact.
void save_checkpoint(const std::filesystem::path& path, const TrainConfig& config, const Model& model,
                     int epoch, const nlohmann::json& info);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace masgcn
