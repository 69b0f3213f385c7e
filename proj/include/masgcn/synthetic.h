#pragma once

// Small generated corpora with parsed trees, for tests and offline runs.
// Each sentence has an aspect term with an opinion word attached to it in
// the tree; the label is that word's polarity. A distractor opinion word of
// another polarity hangs off a different node.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "masgcn/corpus.h"

namespace masgcn {

struct SyntheticOptions {
  int count = 64;
  std::uint64_t seed = 7;
  int min_len = 5;
  int max_len = 14;
  double distractor_rate = 0.5;
  double two_token_aspect_rate = 0.2;
};

std::vector<RawExample> synthetic_corpus(const SyntheticOptions& opt);

void write_jsonl(const std::filesystem::path& path, std::span<const RawExample> examples);

}  // namespace masgcn
