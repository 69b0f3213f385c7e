#pragma once

// Dataset ingestion, vocabularies and tokenization.
//
// Datasets are JSON-lines files, one sentence/aspect pair per line:
//   {"token": [...], "pos": [...], "head": [...], "deprel": [...],
//    "aspect_from": 1, "aspect_to": 2, "polarity": "positive"}
// Heads are 0-based with -1 marking the root; the root's deprel is "root".

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "masgcn/common.h"

namespace masgcn {

enum class Polarity { kPositive = 0, kNegative = 1, kNeutral = 2 };
enum class Split { kTrain, kTest };

const char* polarity_name(Polarity p);
Polarity parse_polarity(const std::string& s);
const char* split_name(Split s);
Split parse_split(const std::string& s);

struct RawExample {
  std::vector<std::string> tokens;
  std::vector<std::string> pos_tags;
  int aspect_from = 0;
  int aspect_to = 0;
  Polarity polarity = Polarity::kNeutral;
  std::vector<int> heads;
  std::vector<std::string> dep_labels;

  int size() const { return static_cast<int>(tokens.size()); }
};

// Throws FormatError/StructureError naming `index` when an invariant fails.
void validate_example(const RawExample& ex, std::size_t index);

RawExample example_from_json(const nlohmann::json& j);
nlohmann::json example_to_json(const RawExample& ex);

struct PolarityCounts {
  int positive = 0;
  int negative = 0;
  int neutral = 0;

  int total() const { return positive + negative + neutral; }
  bool operator==(const PolarityCounts&) const = default;
};

struct Dataset {
  Split split = Split::kTrain;
  std::vector<RawExample> examples;
  PolarityCounts counts;
};

PolarityCounts count_polarities(std::span<const RawExample> examples);

// Reads and validates every record. Empty files yield an empty dataset and
// a warning on stderr.
Dataset load_dataset(const std::filesystem::path& path, Split split);

enum class VocabKind { kWord, kPos, kDepType, kPolarity };
const char* vocab_kind_name(VocabKind k);

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  // Dependency-type ids: 0 is "no edge", 1 the reserved unknown type.
  static constexpr int kNoEdge = 0;
  static constexpr int kUnkType = 1;

  Vocabulary() = default;
  // `tokens` are the non-special entries in id order.
  Vocabulary(VocabKind kind, const std::vector<std::string>& tokens);

  VocabKind kind() const { return kind_; }
  // Unknown strings map to the unk id (word/pos/dep_type); polarity
  // vocabularies throw instead.
  int id(const std::string& token) const;
  bool contains(const std::string& token) const { return token_to_id_.count(token) != 0; }
  const std::string& token(int id) const;
  // Number of ids including specials.
  int size() const { return static_cast<int>(id_to_token_.size()); }
  // Largest dependency-type id (U); ids occupy [1, U].
  int num_types() const { return size() - 1; }

  const std::map<std::string, int>& token_to_id() const { return token_to_id_; }
  const std::vector<std::string>& id_to_token() const { return id_to_token_; }

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);
  bool operator==(const Vocabulary&) const = default;

 private:
  VocabKind kind_ = VocabKind::kWord;
  std::map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

struct Vocabularies {
  Vocabulary word;
  Vocabulary pos;
  Vocabulary dep_type;
  Vocabulary polarity;

  const Vocabulary& get(VocabKind k) const;
  bool operator==(const Vocabularies&) const = default;
};

// Built from the training split only; throws on empty input.
Vocabularies build_vocabularies(std::span<const RawExample> examples);

struct TokenizedExample {
  std::vector<std::string> tokens;
  std::vector<int> word_ids;
  std::vector<int> pos_ids;
  std::vector<int> rel_positions;
  std::vector<char> aspect_mask;
  int label_id = 0;
  std::vector<int> heads;
  std::vector<int> dep_label_ids;

  int size() const { return static_cast<int>(word_ids.size()); }
  std::vector<int> aspect_indices() const;
  bool operator==(const TokenizedExample&) const = default;
};

std::string normalize_word(const std::string& w);

// rel_positions: signed offset to the nearest aspect token, clipped to
// [-max_rel_pos, max_rel_pos].
TokenizedExample tokenize(const RawExample& ex, const Vocabularies& vocabs, int max_rel_pos);

}  // namespace masgcn
