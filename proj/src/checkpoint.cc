#include "masgcn/checkpoint.h"

#include <cstring>

#include "masgcn/archive.h"

namespace masgcn {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'M', 'A', 'S', 'G', 'C', 'N', 'C', '1'};

const char* gate_name(views::GateMode m) {
  switch (m) {
    case views::GateMode::kLearned: return "learned";
    case views::GateMode::kNormalized: return "normalized";
    case views::GateMode::kMean: return "mean";
  }
  return "learned";
}

views::GateMode parse_gate(const std::string& s) {
  if (s == "learned") return views::GateMode::kLearned;
  if (s == "normalized") return views::GateMode::kNormalized;
  if (s == "mean") return views::GateMode::kMean;
  throw FormatError("unknown gate mode '" + s + "'");
}

template <typename T>
void put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::string_view data, std::size_t& pos) {
  if (pos + sizeof(T) > data.size()) throw FormatError("checkpoint truncated");
  T v;
  std::memcpy(&v, data.data() + pos, sizeof v);
  pos += sizeof v;
  return v;
}

}  // namespace

json model_config_to_json(const ModelConfig& m) {
  return {{"word_vocab", m.word_vocab},   {"pos_vocab", m.pos_vocab},     {"num_types", m.num_types},
          {"word_dim", m.word_dim},       {"pos_dim", m.pos_dim},         {"position_dim", m.position_dim},
          {"hidden_dim", m.hidden_dim},   {"num_views", m.num_views},     {"num_layers", m.num_layers},
          {"max_rel_pos", m.max_rel_pos}, {"dropout", m.dropout},         {"gate_mode", gate_name(m.gate_mode)},
          {"freeze_word_embeddings", m.freeze_word_embeddings}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig m;
  m.word_vocab = j.at("word_vocab").get<int>();
  m.pos_vocab = j.at("pos_vocab").get<int>();
  m.num_types = j.at("num_types").get<int>();
  m.word_dim = j.at("word_dim").get<int>();
  m.pos_dim = j.at("pos_dim").get<int>();
  m.position_dim = j.at("position_dim").get<int>();
  m.hidden_dim = j.at("hidden_dim").get<int>();
  m.num_views = j.at("num_views").get<int>();
  m.num_layers = j.at("num_layers").get<int>();
  m.max_rel_pos = j.at("max_rel_pos").get<int>();
  m.dropout = j.at("dropout").get<double>();
  m.gate_mode = parse_gate(j.at("gate_mode").get<std::string>());
  m.freeze_word_embeddings = j.at("freeze_word_embeddings").get<bool>();
  return m;
}

void save_checkpoint(const std::filesystem::path& path, const TrainConfig& config, const Model& model,
                     int epoch, const json& info) {
  json header{{"config", config.to_json()},
              {"model_config", model_config_to_json(model.config())},
              {"epoch", epoch},
              {"info", info}};
  const std::string text = header.dump();
  std::string out(kMagic, sizeof kMagic);
  put<std::uint64_t>(out, text.size());
  out += text;
  const auto& params = model.params().all();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out += p.name;
    put<std::uint64_t>(out, static_cast<std::uint64_t>(p.value.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(p.value.cols()));
    out.append(reinterpret_cast<const char*>(p.value.data()), sizeof(double) * static_cast<std::size_t>(p.value.size()));
  }
  write_file_atomic(path, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  if (data.size() < sizeof kMagic || std::memcmp(data.data(), kMagic, sizeof kMagic) != 0) {
    throw FormatError("not a checkpoint: " + path.string());
  }
  std::size_t pos = sizeof kMagic;
  const auto header_len = get<std::uint64_t>(data, pos);
  if (pos + header_len > data.size()) throw FormatError("checkpoint truncated");
  const json header = json::parse(data.substr(pos, header_len));
  pos += header_len;

  Checkpoint ck;
  ck.config = TrainConfig::from_json(header.at("config"));
  ck.model_config = model_config_from_json(header.at("model_config"));
  ck.epoch = header.at("epoch").get<int>();
  ck.info = header.at("info");
  ck.model = Model(ck.model_config, 0);

  auto& params = ck.model.params();
  const auto count = get<std::uint32_t>(data, pos);
  if (count != static_cast<std::uint32_t>(params.size())) throw FormatError("checkpoint parameter count mismatch");
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = get<std::uint32_t>(data, pos);
    if (pos + name_len > data.size()) throw FormatError("checkpoint truncated");
    const std::string name = data.substr(pos, name_len);
    pos += name_len;
    const auto rows = get<std::uint64_t>(data, pos);
    const auto cols = get<std::uint64_t>(data, pos);
    Param& p = params[params.slot(name)];
    if (static_cast<Eigen::Index>(rows) != p.value.rows() || static_cast<Eigen::Index>(cols) != p.value.cols()) {
      throw FormatError("checkpoint shape mismatch for " + name);
    }
    const std::size_t bytes = sizeof(double) * rows * cols;
    if (pos + bytes > data.size()) throw FormatError("checkpoint truncated");
    std::memcpy(p.value.data(), data.data() + pos, bytes);
    pos += bytes;
  }
  if (pos != data.size()) throw FormatError("checkpoint has trailing bytes");
  return ck;
}

}  // namespace masgcn
