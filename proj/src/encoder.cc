#include "masgcn/encoder.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

namespace masgcn::encoder {

int position_index(int rel, int max_rel_pos) {
  return std::clamp(rel, -max_rel_pos, max_rel_pos) + max_rel_pos + 1;
}

int position_table_rows(int max_rel_pos) { return 2 * max_rel_pos + 2; }

namespace {

ag::Var lookup(Binder& bind, int slot, std::span<const int> ids) {
  const Param& p = bind.store()[slot];
  return ag::lookup_rows(bind.tape(), p.trainable ? slot : -1, p.value, ids);
}

}  // namespace

ag::Var embed(Binder& bind, const EncoderSlots& slots, const TokenizedExample& ex) {
  std::vector<int> positions;
  positions.reserve(ex.rel_positions.size());
  for (int r : ex.rel_positions) positions.push_back(position_index(r, slots.max_rel_pos));
  // Unused padding slots carry id 0 in every table, including position.
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (ex.word_ids[i] == Vocabulary::kPad && ex.pos_ids[i] == Vocabulary::kPad) positions[i] = 0;
  }
  ag::Var w = lookup(bind, slots.word, ex.word_ids);
  ag::Var p = lookup(bind, slots.pos, ex.pos_ids);
  ag::Var q = lookup(bind, slots.position, positions);
  return ag::concat_cols(ag::concat_cols(w, p), q);
}

Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64& rng) {
  if (rate <= 0.0) return Mat::Ones(rows, cols);
  if (rate >= 1.0) return Mat::Zero(rows, cols);
  std::bernoulli_distribution keep(1.0 - rate);
  const double s = 1.0 / (1.0 - rate);
  Mat m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = keep(rng) ? s : 0.0;
  }
  return m;
}

ag::Var gather_rows(ag::Var h, std::span<const int> rows) {
  ag::Tape& t = h.tape();
  std::vector<int> sel(rows.begin(), rows.end());
  Mat out(static_cast<Eigen::Index>(sel.size()), h.cols());
  for (std::size_t i = 0; i < sel.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = h.value().row(sel[i]);
  const int ih = h.id();
  return t.record(std::move(out), {h}, [ih, sel](ag::Tape& t, int self) {
    const Mat& g = t.grad(self);
    Mat dh = Mat::Zero(t.value(ih).rows(), t.value(ih).cols());
    for (std::size_t i = 0; i < sel.size(); ++i) dh.row(sel[i]) += g.row(static_cast<Eigen::Index>(i));
    t.accumulate(ih, dh);
  });
}

ContextualEncoding encode(Binder& bind, const EncoderSlots& slots, ag::Var x,
                          std::span<const int> aspect_rows, const Mat* input_mask) {
  if (x.rows() < 1) throw Error("encode: empty sentence");
  if (aspect_rows.empty()) throw Error("encode: empty aspect");
  ag::Var in = input_mask ? ag::mask_mul(x, *input_mask) : x;
  ag::Var fw = ag::lstm(in, bind(slots.fw_wx), bind(slots.fw_wh), bind(slots.fw_b), false);
  ag::Var bw = ag::lstm(in, bind(slots.bw_wx), bind(slots.bw_wh), bind(slots.bw_b), true);
  ContextualEncoding enc;
  enc.h = ag::concat_cols(fw, bw);
  enc.aspect_rows.assign(aspect_rows.begin(), aspect_rows.end());
  enc.h_aspect = gather_rows(enc.h, aspect_rows);
  enc.h_aspect_hat = ag::broadcast_rows(ag::rows_mean(enc.h, aspect_rows), enc.h.rows());
  return enc;
}

PretrainedTable load_pretrained_vectors(const std::filesystem::path& path, const Vocabulary& vocab,
                                        int dim, std::mt19937_64& rng) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pretrained vectors " + path.string());
  PretrainedTable out;
  out.table = uniform(vocab.size(), dim, 0.25, rng);
  out.table.row(Vocabulary::kPad).setZero();
  std::vector<char> filled(static_cast<std::size_t>(vocab.size()), 0);

  std::string line;
  std::size_t line_no = 0;
  bool dim_checked = false;
  std::vector<std::string> parts;
  while (std::getline(in, line)) {
    ++line_no;
    parts.clear();
    std::istringstream ss(line);
    for (std::string tok; ss >> tok;) parts.push_back(std::move(tok));
    if (parts.empty()) continue;
    if (!dim_checked) {
      if (static_cast<int>(parts.size()) - 1 != dim) {
        throw FormatError(path.string() + ": vectors have dimension " +
                          std::to_string(static_cast<int>(parts.size()) - 1) + ", expected " +
                          std::to_string(dim));
      }
      dim_checked = true;
    }
    if (static_cast<int>(parts.size()) < dim + 1) {
      std::cerr << "warning: " << path.string() << ":" << line_no << ": malformed vector line skipped\n";
      ++out.skipped_lines;
      continue;
    }
    // Words may contain spaces; the last `dim` fields are the vector.
    const std::size_t word_fields = parts.size() - static_cast<std::size_t>(dim);
    std::string word = parts[0];
    for (std::size_t i = 1; i < word_fields; ++i) word += " " + parts[i];
    const std::string key = normalize_word(word);
    if (!vocab.contains(key)) continue;
    const int id = vocab.id(key);
    if (filled[id] && word != key) continue;
    RowVec v(dim);
    bool ok = true;
    for (int k = 0; k < dim && ok; ++k) {
      const std::string& f = parts[word_fields + static_cast<std::size_t>(k)];
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), x);
      ok = ec == std::errc() && ptr == f.data() + f.size();
      v(k) = x;
    }
    if (!ok) {
      std::cerr << "warning: " << path.string() << ":" << line_no << ": malformed vector line skipped\n";
      ++out.skipped_lines;
      continue;
    }
    if (!filled[id]) ++out.found;
    filled[id] = 1;
    out.table.row(id) = v;
  }
  const int entries = vocab.size() - 2;
  out.coverage = entries > 0 ? static_cast<double>(out.found) / entries : 0.0;
  return out;
}

}  // namespace masgcn::encoder
