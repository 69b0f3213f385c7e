#include "masgcn/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <queue>
#include <unordered_map>

namespace masgcn {

using nlohmann::json;

const char* polarity_name(Polarity p) {
  switch (p) {
    case Polarity::kPositive: return "positive";
    case Polarity::kNegative: return "negative";
    case Polarity::kNeutral: return "neutral";
  }
  return "?";
}

Polarity parse_polarity(const std::string& s) {
  if (s == "positive") return Polarity::kPositive;
  if (s == "negative") return Polarity::kNegative;
  if (s == "neutral") return Polarity::kNeutral;
  throw FormatError("unknown polarity '" + s + "'");
}

const char* split_name(Split s) { return s == Split::kTrain ? "train" : "test"; }

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  throw ConfigError("unknown split '" + s + "' (expected train or test)");
}

void validate_example(const RawExample& ex, std::size_t index) {
  const std::string where = "sentence " + std::to_string(index);
  const std::size_t n = ex.tokens.size();
  if (n == 0) throw FormatError(where + ": empty token list");
  if (ex.pos_tags.size() != n || ex.heads.size() != n || ex.dep_labels.size() != n) {
    throw FormatError(where + ": token/pos/head/deprel lengths differ");
  }
  if (ex.aspect_from < 0 || ex.aspect_from >= ex.aspect_to || ex.aspect_to > static_cast<int>(n)) {
    throw FormatError(where + ": aspect span [" + std::to_string(ex.aspect_from) + ", " +
                      std::to_string(ex.aspect_to) + ") outside sentence");
  }
  int root = -1;
  std::vector<std::vector<int>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int h = ex.heads[i];
    if (h == -1) {
      if (root != -1) throw StructureError(where + ": more than one root");
      root = static_cast<int>(i);
      continue;
    }
    if (h < 0 || h >= static_cast<int>(n) || h == static_cast<int>(i)) {
      throw StructureError(where + ": head index " + std::to_string(h) + " out of range");
    }
    adj[h].push_back(static_cast<int>(i));
    adj[i].push_back(h);
  }
  if (root == -1) throw StructureError(where + ": no root");
  // n-1 edges and connected implies a tree.
  std::vector<char> seen(n, 0);
  std::queue<int> q;
  q.push(root);
  seen[root] = 1;
  std::size_t reached = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        q.push(v);
      }
    }
  }
  if (reached != n) throw StructureError(where + ": heads do not form a tree (cycle or disconnected)");
}

namespace {

template <typename T>
T field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

RawExample example_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("record is not a JSON object");
  RawExample ex;
  ex.tokens = field<std::vector<std::string>>(j, "token");
  ex.pos_tags = field<std::vector<std::string>>(j, "pos");
  ex.heads = field<std::vector<int>>(j, "head");
  ex.dep_labels = field<std::vector<std::string>>(j, "deprel");
  ex.aspect_from = field<int>(j, "aspect_from");
  ex.aspect_to = field<int>(j, "aspect_to");
  const auto pol = field<std::string>(j, "polarity");
  try {
    ex.polarity = parse_polarity(pol);
  } catch (const FormatError& e) {
    throw FormatError(std::string("field 'polarity': ") + e.what());
  }
  return ex;
}

json example_to_json(const RawExample& ex) {
  return json{{"token", ex.tokens},          {"pos", ex.pos_tags},
              {"head", ex.heads},            {"deprel", ex.dep_labels},
              {"aspect_from", ex.aspect_from}, {"aspect_to", ex.aspect_to},
              {"polarity", polarity_name(ex.polarity)}};
}

PolarityCounts count_polarities(std::span<const RawExample> examples) {
  PolarityCounts c;
  for (const auto& ex : examples) {
    switch (ex.polarity) {
      case Polarity::kPositive: ++c.positive; break;
      case Polarity::kNegative: ++c.negative; break;
      case Polarity::kNeutral: ++c.neutral; break;
    }
  }
  return c;
}

Dataset load_dataset(const std::filesystem::path& path, Split split) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path.string());
  Dataset ds;
  ds.split = split;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    RawExample ex;
    try {
      ex = example_from_json(json::parse(line));
    } catch (const json::parse_error& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    try {
      validate_example(ex, ds.examples.size());
    } catch (const Error& e) {
      throw StructureError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    ds.examples.push_back(std::move(ex));
  }
  if (ds.examples.empty()) std::cerr << "warning: dataset " << path.string() << " is empty\n";
  ds.counts = count_polarities(ds.examples);
  return ds;
}

const char* vocab_kind_name(VocabKind k) {
  switch (k) {
    case VocabKind::kWord: return "word";
    case VocabKind::kPos: return "pos";
    case VocabKind::kDepType: return "dep_type";
    case VocabKind::kPolarity: return "polarity";
  }
  return "?";
}

namespace {

VocabKind parse_kind(const std::string& s) {
  for (VocabKind k : {VocabKind::kWord, VocabKind::kPos, VocabKind::kDepType, VocabKind::kPolarity}) {
    if (s == vocab_kind_name(k)) return k;
  }
  throw FormatError("unknown vocabulary kind '" + s + "'");
}

std::vector<std::string> specials(VocabKind k) {
  switch (k) {
    case VocabKind::kWord:
    case VocabKind::kPos: return {"<pad>", "<unk>"};
    case VocabKind::kDepType: return {"<none>", "<unk>"};
    case VocabKind::kPolarity: return {};
  }
  return {};
}

// Frequency-descending, ties broken lexicographically.
std::vector<std::string> by_frequency(const std::unordered_map<std::string, int>& freq) {
  std::vector<std::pair<std::string, int>> items(freq.begin(), freq.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> out;
  out.reserve(items.size());
  for (auto& [tok, _] : items) out.push_back(tok);
  return out;
}

}  // namespace

Vocabulary::Vocabulary(VocabKind kind, const std::vector<std::string>& tokens) : kind_(kind) {
  id_to_token_ = specials(kind);
  for (const auto& t : tokens) {
    if (token_to_id_.count(t)) throw FormatError("duplicate vocabulary entry '" + t + "'");
    token_to_id_[t] = static_cast<int>(id_to_token_.size());
    id_to_token_.push_back(t);
  }
}

int Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  if (it != token_to_id_.end()) return it->second;
  if (kind_ == VocabKind::kPolarity) throw FormatError("unknown polarity '" + token + "'");
  return kind_ == VocabKind::kDepType ? kUnkType : kUnk;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw Error("vocabulary id " + std::to_string(id) + " out of range");
  return id_to_token_[id];
}

json Vocabulary::to_json() const {
  const std::size_t skip = specials(kind_).size();
  std::vector<std::string> entries(id_to_token_.begin() + static_cast<std::ptrdiff_t>(skip),
                                   id_to_token_.end());
  return json{{"kind", vocab_kind_name(kind_)}, {"specials", specials(kind_)}, {"tokens", entries}};
}

Vocabulary Vocabulary::from_json(const json& j) {
  return Vocabulary(parse_kind(j.at("kind").get<std::string>()),
                    j.at("tokens").get<std::vector<std::string>>());
}

const Vocabulary& Vocabularies::get(VocabKind k) const {
  switch (k) {
    case VocabKind::kWord: return word;
    case VocabKind::kPos: return pos;
    case VocabKind::kDepType: return dep_type;
    case VocabKind::kPolarity: return polarity;
  }
  return word;
}

std::string normalize_word(const std::string& w) {
  std::string out = w;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

Vocabularies build_vocabularies(std::span<const RawExample> examples) {
  if (examples.empty()) throw Error("build_vocabularies: no training examples");
  std::unordered_map<std::string, int> words, tags, deps;
  for (const auto& ex : examples) {
    for (const auto& t : ex.tokens) ++words[normalize_word(t)];
    for (const auto& p : ex.pos_tags) ++tags[p];
    for (const auto& d : ex.dep_labels) ++deps[d];
  }
  Vocabularies v;
  v.word = Vocabulary(VocabKind::kWord, by_frequency(words));
  v.pos = Vocabulary(VocabKind::kPos, by_frequency(tags));
  v.dep_type = Vocabulary(VocabKind::kDepType, by_frequency(deps));
  v.polarity = Vocabulary(VocabKind::kPolarity, {"positive", "negative", "neutral"});
  return v;
}

std::vector<int> TokenizedExample::aspect_indices() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (aspect_mask[i]) out.push_back(i);
  }
  return out;
}

TokenizedExample tokenize(const RawExample& ex, const Vocabularies& vocabs, int max_rel_pos) {
  const int n = ex.size();
  if (ex.aspect_from < 0 || ex.aspect_from >= ex.aspect_to || ex.aspect_to > n) {
    throw FormatError("tokenize: aspect span outside sentence");
  }
  TokenizedExample out;
  out.tokens = ex.tokens;
  out.heads = ex.heads;
  out.label_id = vocabs.polarity.id(polarity_name(ex.polarity));
  for (int i = 0; i < n; ++i) {
    out.word_ids.push_back(vocabs.word.id(normalize_word(ex.tokens[i])));
    out.pos_ids.push_back(vocabs.pos.id(ex.pos_tags[i]));
    out.dep_label_ids.push_back(vocabs.dep_type.id(ex.dep_labels[i]));
    int rel = 0;
    if (i < ex.aspect_from) rel = i - ex.aspect_from;
    if (i >= ex.aspect_to) rel = i - (ex.aspect_to - 1);
    out.rel_positions.push_back(std::clamp(rel, -max_rel_pos, max_rel_pos));
    out.aspect_mask.push_back(i >= ex.aspect_from && i < ex.aspect_to ? 1 : 0);
  }
  return out;
}

}  // namespace masgcn
