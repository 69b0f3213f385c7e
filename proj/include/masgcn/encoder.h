#pragma once

// Word/POS/position embeddings and the bidirectional LSTM context encoder.

#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "masgcn/autograd.h"
#include "masgcn/corpus.h"
#include "masgcn/params.h"

namespace masgcn::encoder {

struct EncoderSlots {
  int word = -1;
  int pos = -1;
  int position = -1;
  int fw_wx = -1, fw_wh = -1, fw_b = -1;
  int bw_wx = -1, bw_wh = -1, bw_b = -1;
  int max_rel_pos = 40;
};

// Row of the position table for a clipped relative offset; row 0 is pad.
int position_index(int rel, int max_rel_pos);
int position_table_rows(int max_rel_pos);

// [word | pos | position] per token.
ag::Var embed(Binder& bind, const EncoderSlots& slots, const TokenizedExample& ex);

struct ContextualEncoding {
  ag::Var h;             // N x D
  ag::Var h_aspect;      // M x D, rows of h at aspect positions
  ag::Var h_aspect_hat;  // N x D, every row the mean of h_aspect
  std::vector<int> aspect_rows;
};

// Inverted-dropout mask: entries are 0 with probability `rate`, otherwise
// 1 / (1 - rate).
Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64& rng);

// `input_mask` (same shape as x) is applied before the LSTMs when given;
// callers pass one only in training mode.
ContextualEncoding encode(Binder& bind, const EncoderSlots& slots, ag::Var x,
                          std::span<const int> aspect_rows, const Mat* input_mask);

// Gathers rows of h (differentiably).
ag::Var gather_rows(ag::Var h, std::span<const int> rows);

struct PretrainedTable {
  Mat table;
  int found = 0;
  int skipped_lines = 0;
  // Fraction of non-special vocabulary entries found in the file.
  double coverage = 0.0;
};

// Text format: `word v1 ... v_dim` per line. Rows for vocabulary words in the
// file are copied; others are uniform in [-0.25, 0.25]; the pad row is zero.
PretrainedTable load_pretrained_vectors(const std::filesystem::path& path, const Vocabulary& vocab,
                                        int dim, std::mt19937_64& rng);

}  // namespace masgcn::encoder
