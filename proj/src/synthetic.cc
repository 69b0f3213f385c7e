#include "masgcn/synthetic.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "masgcn/archive.h"

namespace masgcn {

namespace {

const std::vector<std::string> kOpinion[3] = {
    {"great", "good", "excellent", "delicious", "friendly", "amazing", "fresh"},
    {"bad", "terrible", "rude", "awful", "bland", "slow", "stale"},
    {"average", "ordinary", "standard", "usual", "typical", "regular", "plain"}};
const std::vector<std::string> kAspect = {"food", "service", "staff", "menu", "price", "ambience", "waiter", "decor"};
const std::vector<std::string> kModifier = {"wine", "dessert", "lunch", "house", "bar"};
const std::vector<std::pair<std::string, std::string>> kFiller = {
    {"the", "DT"},   {"a", "DT"},      {"was", "VBD"},  {"is", "VBZ"},   {"and", "CC"},
    {"but", "CC"},   {"we", "PRP"},    {"it", "PRP"},   {"very", "RB"},  {"really", "RB"},
    {"place", "NN"}, {"table", "NN"},  {"night", "NN"}, {"there", "EX"}, {"our", "PRP$"},
    {"of", "IN"},    {"with", "IN"},   {"visit", "NN"}, {"seemed", "VBD"}};
const std::vector<std::string> kFillerRel = {"det", "dep", "advmod", "case", "cc", "nmod", "obj"};

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

}  // namespace

std::vector<RawExample> synthetic_corpus(const SyntheticOptions& opt) {
  if (opt.count < 0 || opt.min_len < 5 || opt.max_len < opt.min_len) {
    throw ConfigError("synthetic_corpus: need count >= 0 and 5 <= min_len <= max_len");
  }
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<RawExample> out;
  for (int s = 0; s < opt.count; ++s) {
    const int n = std::uniform_int_distribution<int>(opt.min_len, opt.max_len)(rng);
    const int label = s % 3;
    const bool two = coin(rng) < opt.two_token_aspect_rate;
    const bool distract = coin(rng) < opt.distractor_rate;

    // Slot assignment over positions.
    std::vector<int> pos(n);
    std::iota(pos.begin(), pos.end(), 0);
    const int from = std::uniform_int_distribution<int>(0, n - (two ? 3 : 2))(rng);
    const int to = from + (two ? 2 : 1);
    const int head_tok = to - 1;
    std::vector<int> free;
    for (int i = 0; i < n; ++i) {
      if (i < from || i >= to) free.push_back(i);
    }
    std::shuffle(free.begin(), free.end(), rng);
    const int opinion = free[0];
    const int root = free[1];
    const int distractor = distract ? free[2] : -1;

    RawExample ex;
    ex.tokens.assign(n, "");
    ex.pos_tags.assign(n, "");
    ex.heads.assign(n, -1);
    ex.dep_labels.assign(n, "");
    ex.aspect_from = from;
    ex.aspect_to = to;
    ex.polarity = static_cast<Polarity>(label);

    ex.tokens[root] = "was";
    ex.pos_tags[root] = "VBD";
    ex.dep_labels[root] = "root";
    ex.tokens[head_tok] = pick(kAspect, rng);
    ex.pos_tags[head_tok] = "NN";
    ex.heads[head_tok] = root;
    ex.dep_labels[head_tok] = "nsubj";
    if (two) {
      ex.tokens[from] = pick(kModifier, rng);
      ex.pos_tags[from] = "NN";
      ex.heads[from] = head_tok;
      ex.dep_labels[from] = "compound";
    }
    ex.tokens[opinion] = pick(kOpinion[label], rng);
    ex.pos_tags[opinion] = "JJ";
    ex.heads[opinion] = head_tok;
    ex.dep_labels[opinion] = "amod";

    std::vector<int> attached = {root, head_tok};
    if (distractor >= 0) {
      const int other = (label + 1 + static_cast<int>(coin(rng) * 2.0)) % 3;
      ex.tokens[distractor] = pick(kOpinion[other], rng);
      ex.pos_tags[distractor] = "JJ";
      ex.heads[distractor] = root;
      ex.dep_labels[distractor] = "conj";
      attached.push_back(distractor);
    }
    for (std::size_t k = distract ? 3 : 2; k < free.size(); ++k) {
      const int i = free[k];
      const auto& [word, tag] = pick(kFiller, rng);
      ex.tokens[i] = word;
      ex.pos_tags[i] = tag;
      ex.heads[i] = pick(attached, rng);
      ex.dep_labels[i] = pick(kFillerRel, rng);
      attached.push_back(i);
    }
    validate_example(ex, out.size());
    out.push_back(std::move(ex));
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, std::span<const RawExample> examples) {
  std::ostringstream os;
  for (const auto& ex : examples) os << example_to_json(ex).dump() << "\n";
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_file_atomic(path, os.str());
}

}  // namespace masgcn
