#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "masgcn/checkpoint.h"
#include "masgcn/experiments.h"
#include "masgcn/synthetic.h"
#include "masgcn/trainer.h"

using namespace masgcn;
namespace fs = std::filesystem;

namespace {

TrainConfig load_config(const std::string& path) { return path.empty() ? TrainConfig{} : TrainConfig::load(path); }

void print_report(const EvalReport& r, std::ostream& os) {
  os << std::fixed << std::setprecision(4);
  os << "examples  " << r.count << "\naccuracy  " << r.accuracy << "\nmacro_f1  " << r.macro_f1 << "\n";
  const char* names[] = {"positive", "negative", "neutral"};
  os << std::left << std::setw(10) << "class" << std::right << std::setw(10) << "prec" << std::setw(10) << "rec"
     << std::setw(10) << "f1" << "   confusion (gold row)\n";
  for (int c = 0; c < kNumClasses; ++c) {
    os << std::left << std::setw(10) << names[c] << std::right << std::setw(10) << r.per_class[c].precision
       << std::setw(10) << r.per_class[c].recall << std::setw(10) << r.per_class[c].f1 << "  ";
    for (int p = 0; p < kNumClasses; ++p) os << std::setw(6) << r.confusion[c][p];
    os << "\n";
  }
  os << "config_hash " << r.config_hash << "\nseed " << r.seed << "\n";
}

std::vector<double> parse_csv(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ConfigError("invalid value '" + item + "' in --values");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--values is empty");
  return out;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
  std::cerr << "wrote " << path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"masgcn: multi-view attention syntactic GCN for aspect sentiment"};
  app.require_subcommand(1);

  std::string dataset = "restaurant14", data_dir, out_root, config_path, ckpt, split = "test", out_path, param,
              values;
  int num_views = 10, max_rel_pos = 40, id = 0, threads = 0;
  bool serial = false;

  auto* prep = app.add_subcommand("prepare", "Build the feature cache for a dataset");
  prep->add_option("--dataset", dataset, "Dataset name")->required();
  prep->add_option("--data-dir", data_dir, "Directory with <dataset>/{train,test}.jsonl")->required();
  prep->add_option("--out", out_root, "Cache root; the archive goes to <out>/<dataset>")->required();
  prep->add_option("--num-views", num_views, "Number of distance masks P");
  prep->add_option("--max-rel-pos", max_rel_pos, "Relative position clip");
  prep->add_option("--config", config_path, "Take num_views/max_rel_pos from a config file");

  auto* tr = app.add_subcommand("train", "Train a model");
  tr->add_option("--config", config_path, "Config file (JSON)")->required();
  tr->add_flag("--serial", serial, "Use the serial reference kernels");
  tr->add_option("--threads", threads, "OpenMP threads (overrides config)");

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  ev->add_option("--ckpt", ckpt, "Checkpoint file")->required();
  ev->add_option("--split", split, "train or test");
  ev->add_option("--out", out_path, "Report JSON path");

  auto* ab = app.add_subcommand("ablate", "Full model vs. no structural entropy vs. no view gate");
  ab->add_option("--config", config_path, "Config file (JSON)")->required();
  ab->add_option("--out", out_path, "Report JSON path");
  ab->add_flag("--serial", serial, "Use the serial reference kernels");

  auto* sw = app.add_subcommand("sweep", "Train one model per value of P or gamma");
  sw->add_option("--param", param, "P or gamma")->required()->check(CLI::IsMember({"P", "gamma"}));
  sw->add_option("--values", values, "Comma-separated values")->required();
  sw->add_option("--config", config_path, "Config file (JSON); defaults otherwise");
  sw->add_option("--out", out_path, "Report JSON path");
  sw->add_flag("--serial", serial, "Use the serial reference kernels");

  auto* ex = app.add_subcommand("export-matrices", "Dump per-view attention matrices of one sentence");
  ex->add_option("--ckpt", ckpt, "Checkpoint file")->required();
  ex->add_option("--id", id, "Sentence index within the split")->required();
  ex->add_option("--split", split, "train or test");
  ex->add_option("--out", out_path, "Output JSON path");

  int synth_train = 600, synth_test = 150;
  std::uint64_t synth_seed = 7;
  auto* sy = app.add_subcommand("synth", "Write a generated corpus as <out>/{train,test}.jsonl");
  sy->add_option("--out", out_root, "Output directory")->required();
  sy->add_option("--train-count", synth_train, "Training sentences");
  sy->add_option("--test-count", synth_test, "Test sentences");
  sy->add_option("--seed", synth_seed, "Generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prep) {
      if (!config_path.empty()) {
        TrainConfig c = TrainConfig::load(config_path);
        num_views = c.num_views;
        max_rel_pos = c.max_rel_pos;
      }
      PreparedData p = prepare_archive(dataset, data_dir, num_views, max_rel_pos);
      const fs::path dir = fs::path(out_root) / dataset;
      write_archive(p.archive, dir);
      std::cout << std::left << std::setw(8) << "split" << std::right << std::setw(10) << "positive" << std::setw(10)
                << "negative" << std::setw(10) << "neutral" << std::setw(10) << "total\n";
      for (const Dataset* d : {&p.train_raw, &p.test_raw}) {
        std::cout << std::left << std::setw(8) << split_name(d->split) << std::right << std::setw(10)
                  << d->counts.positive << std::setw(10) << d->counts.negative << std::setw(10) << d->counts.neutral
                  << std::setw(10) << d->counts.total() << "\n";
      }
      std::cout << "vocab: words " << p.archive.vocabs.word.size() << ", pos " << p.archive.vocabs.pos.size()
                << ", dep types " << p.archive.vocabs.dep_type.num_types() << "\n";
      std::cout << "archive " << dir.string() << " (" << p.archive.meta.config_hash() << ")\n";
    } else if (*tr) {
      TrainConfig c = TrainConfig::load(config_path);
      if (threads > 0) c.threads = threads;
      TrainOptions opt;
      opt.use_omp = !serial;
      TrainResult r = train(c, opt);
      std::cout << "best epoch " << r.best_epoch << "\n";
      print_report(r.best_test, std::cout);
      std::cout << "checkpoint " << r.checkpoint_path << "\n";
    } else if (*ev) {
      Checkpoint ck = load_checkpoint(ckpt);
      FeatureArchive archive = read_archive(ck.config.feature_dir());
      check_archive_matches(ck.config, archive);
      EvalReport rep = evaluate(ck.model, archive.split(parse_split(split)));
      rep.config_hash = ck.config.hash();
      rep.seed = ck.config.seed;
      print_report(rep, std::cout);
      if (!out_path.empty()) write_json(out_path, rep.to_json());
    } else if (*ab || *sw) {
      TrainConfig c = load_config(config_path);
      FeatureArchive archive = read_archive(c.feature_dir());
      TrainOptions opt;
      opt.use_omp = !serial;
      ExperimentReport rep = *ab ? ablate(c, archive, opt) : sweep(c, archive, param, parse_csv(values), opt);
      std::cout << rep.table();
      if (out_path.empty()) out_path = (fs::path(c.out_dir) / (c.dataset + "." + rep.kind + ".json")).string();
      write_json(out_path, rep.to_json());
    } else if (*ex) {
      Checkpoint ck = load_checkpoint(ckpt);
      FeatureArchive archive = read_archive(ck.config.feature_dir());
      check_archive_matches(ck.config, archive);
      nlohmann::json j = export_matrices(ck.model, archive, parse_split(split), id);
      if (out_path.empty()) out_path = (fs::path(ck.config.out_dir) / ("matrices." + split + "." + std::to_string(id) + ".json")).string();
      write_json(out_path, j);
    } else if (*sy) {
      SyntheticOptions o;
      o.seed = synth_seed;
      o.count = synth_train;
      auto train_set = synthetic_corpus(o);
      o.seed = synth_seed + 1;
      o.count = synth_test;
      auto test_set = synthetic_corpus(o);
      write_jsonl(fs::path(out_root) / "train.jsonl", train_set);
      write_jsonl(fs::path(out_root) / "test.jsonl", test_set);
      std::cout << "wrote " << train_set.size() << " train and " << test_set.size() << " test sentences to "
                << out_root << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
