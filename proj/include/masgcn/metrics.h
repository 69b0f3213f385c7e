#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include <json.hpp>

#include "masgcn/common.h"

namespace masgcn {

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool operator==(const ClassScores&) const = default;
};

struct EvalReport {
  int count = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::array<ClassScores, kNumClasses> per_class{};
  // confusion[gold][predicted]
  std::array<std::array<int, kNumClasses>, kNumClasses> confusion{};
  std::string config_hash;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  bool operator==(const EvalReport&) const = default;
};

// Precision/recall/F1 use 0 when their denominator is 0.
EvalReport compute_report(std::span<const int> gold, std::span<const int> predicted);

}  // namespace masgcn
