#include "masgcn/experiments.h"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "masgcn/kernels.h"

namespace masgcn {

using nlohmann::json;
namespace fs = std::filesystem;

std::pair<fs::path, fs::path> dataset_files(const fs::path& data_dir, const std::string& dataset) {
  const fs::path nested = data_dir / dataset;
  if (fs::exists(nested / "train.jsonl") || fs::exists(nested / "test.jsonl")) {
    return {nested / "train.jsonl", nested / "test.jsonl"};
  }
  return {data_dir / "train.jsonl", data_dir / "test.jsonl"};
}

PreparedData prepare_archive(const std::string& dataset, const fs::path& data_dir, int num_views, int max_rel_pos) {
  if (num_views < 1) throw ConfigError("num_views must be >= 1");
  if (max_rel_pos < 0) throw ConfigError("max_rel_pos must be >= 0");
  auto [train_path, test_path] = dataset_files(data_dir, dataset);
  PreparedData out;
  out.train_raw = load_dataset(train_path, Split::kTrain);
  out.test_raw = load_dataset(test_path, Split::kTest);
  Vocabularies vocabs = build_vocabularies(out.train_raw.examples);
  ArchiveMeta meta;
  meta.dataset = dataset;
  meta.num_views = num_views;
  meta.max_rel_pos = max_rel_pos;
  meta.train_path = train_path.string();
  meta.test_path = test_path.string();
  meta.source_digest = file_digest({train_path, test_path});
  out.archive = build_archive(meta, vocabs, out.train_raw.examples, out.test_raw.examples);
  return out;
}

fs::path prepare(const std::string& dataset, const fs::path& data_dir, const fs::path& out_root, int num_views,
                 int max_rel_pos) {
  PreparedData p = prepare_archive(dataset, data_dir, num_views, max_rel_pos);
  const fs::path dir = out_root / dataset;
  write_archive(p.archive, dir);
  return dir;
}

FeatureArchive with_num_views(const FeatureArchive& archive, int num_views) {
  if (num_views < 1) throw ConfigError("num_views must be >= 1");
  FeatureArchive out = archive;
  out.meta.num_views = num_views;
  for (auto* split : {&out.train, &out.test}) {
    for (auto& b : *split) b.syn.masks = syntax::build_masks(b.syn.dist, num_views);
  }
  return out;
}

json ExperimentReport::to_json() const {
  json rows_j = json::array();
  for (const auto& r : rows) {
    rows_j.push_back(json{{"name", r.name},
                          {"accuracy", r.accuracy},
                          {"macro_f1", r.macro_f1},
                          {"delta_accuracy", r.delta_accuracy},
                          {"delta_macro_f1", r.delta_macro_f1},
                          {"best_epoch", r.best_epoch},
                          {"config_hash", r.config_hash}});
  }
  json j{{"kind", kind}, {"dataset", dataset}, {"seed", seed}, {"rows", rows_j}};
  if (!param.empty()) j["param"] = param;
  return j;
}

std::string ExperimentReport::table() const {
  std::ostringstream os;
  os << kind << " on " << dataset << " (seed " << seed << ")\n";
  os << std::left << std::setw(22) << (param.empty() ? "variant" : param) << std::right << std::setw(10) << "acc"
     << std::setw(10) << "f1" << std::setw(10) << "d_acc" << std::setw(10) << "d_f1" << std::setw(8) << "epoch"
     << "\n";
  os << std::fixed << std::setprecision(2);
  for (const auto& r : rows) {
    os << std::left << std::setw(22) << r.name << std::right << std::setw(10) << 100.0 * r.accuracy << std::setw(10)
       << 100.0 * r.macro_f1 << std::setw(10) << 100.0 * r.delta_accuracy << std::setw(10) << 100.0 * r.delta_macro_f1
       << std::setw(8) << r.best_epoch << "\n";
  }
  return os.str();
}

namespace {

ReportRow run_row(const std::string& name, const TrainConfig& cfg, const FeatureArchive& archive, TrainOptions opt) {
  opt.run_name = cfg.dataset + "." + name;
  TrainResult r = train(cfg, archive, opt);
  ReportRow row;
  row.name = name;
  row.accuracy = r.best_test.accuracy;
  row.macro_f1 = r.best_test.macro_f1;
  row.best_epoch = r.best_epoch;
  row.config_hash = cfg.hash();
  return row;
}

void fill_deltas(ExperimentReport& rep) {
  if (rep.rows.empty()) return;
  for (auto& r : rep.rows) {
    r.delta_accuracy = r.accuracy - rep.rows.front().accuracy;
    r.delta_macro_f1 = r.macro_f1 - rep.rows.front().macro_f1;
  }
}

std::string value_label(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

ExperimentReport ablate(const TrainConfig& config, const FeatureArchive& archive, const TrainOptions& opt) {
  ExperimentReport rep;
  rep.kind = "ablation";
  rep.dataset = config.dataset;
  rep.seed = config.seed;
  TrainConfig full = config;
  full.disable_se_loss = false;
  full.disable_view_gate = false;
  TrainConfig no_se = full;
  no_se.disable_se_loss = true;
  TrainConfig no_gate = full;
  no_gate.disable_view_gate = true;
  rep.rows.push_back(run_row("full", full, archive, opt));
  rep.rows.push_back(run_row("no_structural_entropy", no_se, archive, opt));
  rep.rows.push_back(run_row("no_view_gate", no_gate, archive, opt));
  fill_deltas(rep);
  return rep;
}

ExperimentReport sweep(const TrainConfig& config, const FeatureArchive& archive, const std::string& param,
                       const std::vector<double>& values, const TrainOptions& opt) {
  if (values.empty()) throw ConfigError("sweep: values list is empty");
  if (param != "P" && param != "gamma") throw ConfigError("sweep: param must be P or gamma, got '" + param + "'");
  ExperimentReport rep;
  rep.kind = "sweep";
  rep.dataset = config.dataset;
  rep.param = param;
  rep.seed = config.seed;
  for (double v : values) {
    TrainConfig cfg = config;
    const std::string label = param + "=" + value_label(v);
    if (param == "P") {
      if (v < 1 || v != std::floor(v)) throw ConfigError("sweep: P values must be positive integers");
      cfg.num_views = static_cast<int>(v);
      FeatureArchive derived = with_num_views(archive, cfg.num_views);
      rep.rows.push_back(run_row(label, cfg, derived, opt));
    } else {
      if (v < 0) throw ConfigError("sweep: gamma values must be >= 0");
      cfg.gamma = v;
      rep.rows.push_back(run_row(label, cfg, archive, opt));
    }
  }
  fill_deltas(rep);
  return rep;
}

double round6(double x) { return std::round(x * 1e6) / 1e6; }

namespace {

json matrix_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(round6(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json stack_json(const std::vector<Mat>& ms) {
  json out = json::array();
  for (const auto& m : ms) out.push_back(matrix_json(m));
  return out;
}

Mat mean_of(const std::vector<Mat>& ms) {
  Mat acc = Mat::Zero(ms.front().rows(), ms.front().cols());
  for (const auto& m : ms) acc += m;
  return acc / static_cast<double>(ms.size());
}

}  // namespace

json export_matrices(const Model& model, const FeatureArchive& archive, Split split, int id) {
  const auto& examples = archive.split(split);
  if (id < 0 || static_cast<std::size_t>(id) >= examples.size()) {
    throw Error("export-matrices: unknown sentence id " + std::to_string(id) + " (" + split_name(split) + " has " +
                std::to_string(examples.size()) + " sentences)");
  }
  const FeatureBundle& ex = examples[static_cast<std::size_t>(id)];
  ag::Tape tape;
  ForwardOptions fo;
  fo.record_trace = true;
  ForwardOutput out = model.forward(tape, ex, fo);
  const Trace& t = *out.trace;
  const auto aspect = ex.tok.aspect_indices();
  json gates = json::array();
  for (const auto& g : t.gates) {
    json col = json::array();
    for (Eigen::Index i = 0; i < g.rows(); ++i) col.push_back(round6(g(i, 0)));
    gates.push_back(col);
  }
  // Mask entries hold the -1e9 sentinel before softmax; the exported
  // A_mask is the post-softmax matrix.
  return json{{"split", split_name(split)},
              {"id", id},
              {"tokens", ex.tok.tokens},
              {"aspect_span", {aspect.front(), aspect.back() + 1}},
              {"label", archive.vocabs.polarity.token(ex.tok.label_id)},
              {"prediction", archive.vocabs.polarity.token(argmax(t.logits.row(0)))},
              {"num_views", static_cast<int>(t.sem.size())},
              {"a_sem", stack_json(t.sem)},
              {"a_mask", stack_json(t.mask)},
              {"a", stack_json(t.adj)},
              {"mean", {{"a_sem", matrix_json(mean_of(t.sem))},
                        {"a_mask", matrix_json(mean_of(t.mask))},
                        {"a", matrix_json(mean_of(t.adj))}}},
              {"a_type", matrix_json(t.type_matrix)},
              {"gates", gates}};
}

}  // namespace masgcn
