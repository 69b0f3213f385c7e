#include "masgcn/config.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "masgcn/archive.h"

namespace masgcn {

using nlohmann::json;

namespace {

// Every serialized field, in schema order. `affects_results` feeds the hash.
template <typename Config, typename F>
void visit_fields(Config& c, F&& f) {
  f("dataset", c.dataset, true);
  f("cache_dir", c.cache_dir, false);
  f("out_dir", c.out_dir, false);
  f("embedding_path", c.embedding_path, true);
  f("num_views", c.num_views, true);
  f("num_layers", c.num_layers, true);
  f("batch_size", c.batch_size, true);
  f("learning_rate", c.learning_rate, true);
  f("adam_beta1", c.adam_beta1, true);
  f("adam_beta2", c.adam_beta2, true);
  f("adam_eps", c.adam_eps, true);
  f("dropout", c.dropout, true);
  f("gamma", c.gamma, true);
  f("hidden_dim", c.hidden_dim, true);
  f("word_dim", c.word_dim, true);
  f("pos_dim", c.pos_dim, true);
  f("position_dim", c.position_dim, true);
  f("max_rel_pos", c.max_rel_pos, true);
  f("seed", c.seed, true);
  f("epochs", c.epochs, true);
  f("train_subset", c.train_subset, true);
  f("disable_se_loss", c.disable_se_loss, true);
  f("disable_view_gate", c.disable_view_gate, true);
  f("normalize_gates", c.normalize_gates, true);
  f("freeze_word_embeddings", c.freeze_word_embeddings, true);
  f("threads", c.threads, false);
  f("device", c.device, true);
  f("precision", c.precision, true);
}

template <typename T>
bool type_matches(const json& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v.is_boolean();
  } else if constexpr (std::is_same_v<T, std::string>) {
    return v.is_string();
  } else if constexpr (std::is_integral_v<T>) {
    return v.is_number_integer() || v.is_number_unsigned();
  } else {
    return v.is_number();
  }
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("invalid config: " + m); };
  if (num_views < 1) fail("num_views must be >= 1");
  if (num_layers < 1) fail("num_layers must be >= 1");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
  if (!(gamma >= 0.0)) fail("gamma must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (hidden_dim < 1 || word_dim < 1 || pos_dim < 1 || position_dim < 1) fail("dimensions must be >= 1");
  if (max_rel_pos < 0) fail("max_rel_pos must be >= 0");
  if (epochs < 1) fail("epochs must be >= 1");
  if (train_subset < 0) fail("train_subset must be >= 0");
  if (threads < 0) fail("threads must be >= 0");
  if (device != "cpu") fail("device must be \"cpu\"");
  if (precision != "float64") fail("precision must be \"float64\"");
  if (disable_view_gate && normalize_gates) fail("disable_view_gate and normalize_gates are exclusive");
}

views::GateMode TrainConfig::gate_mode() const {
  if (disable_view_gate) return views::GateMode::kMean;
  if (normalize_gates) return views::GateMode::kNormalized;
  return views::GateMode::kLearned;
}

json TrainConfig::to_json() const {
  json j = json::object();
  visit_fields(*this, [&](const char* key, const auto& v, bool) { j[key] = v; });
  return j;
}

TrainConfig TrainConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  TrainConfig c;
  std::set<std::string> known;
  visit_fields(c, [&](const char* key, auto& v, bool) {
    known.insert(key);
    auto it = j.find(key);
    if (it == j.end()) return;
    using T = std::decay_t<decltype(v)>;
    if (!type_matches<T>(*it)) throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    v = it->template get<T>();
  });
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError("unknown config key '" + it.key() + "'");
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

void TrainConfig::save(const std::string& path) const { write_file_atomic(path, to_json().dump(2) + "\n"); }

std::string TrainConfig::hash() const {
  json j = json::object();
  visit_fields(*this, [&](const char* key, const auto& v, bool affects) {
    if (affects) j[key] = v;
  });
  return sha256_hex(j.dump());
}

std::string TrainConfig::feature_dir() const {
  std::filesystem::path root = cache_dir;
  if (const char* env = std::getenv("MASGCN_CACHE_DIR"); env && *env) root = env;
  return (root / dataset).string();
}

ModelConfig TrainConfig::model_config(const Vocabularies& vocabs) const {
  ModelConfig m;
  m.word_vocab = vocabs.word.size();
  m.pos_vocab = vocabs.pos.size();
  m.num_types = vocabs.dep_type.num_types();
  m.word_dim = word_dim;
  m.pos_dim = pos_dim;
  m.position_dim = position_dim;
  m.hidden_dim = hidden_dim;
  m.num_views = num_views;
  m.num_layers = num_layers;
  m.max_rel_pos = max_rel_pos;
  m.dropout = dropout;
  m.gate_mode = gate_mode();
  m.freeze_word_embeddings = freeze_word_embeddings;
  return m;
}

}  // namespace masgcn
