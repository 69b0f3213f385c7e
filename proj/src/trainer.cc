#include "masgcn/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>

#include <omp.h>

#include "masgcn/checkpoint.h"
#include "masgcn/kernels.h"
#include "masgcn/objective.h"
#include "masgcn/optimizer.h"

namespace masgcn {

using nlohmann::json;

nlohmann::json EpochLog::to_json() const {
  json j{{"epoch", epoch},
         {"train_loss", train_loss},
         {"train_ce", train_ce},
         {"train_se", train_se},
         {"test_accuracy", test_accuracy},
         {"test_macro_f1", test_macro_f1},
         {"seconds", seconds}};
  if (train_accuracy) j["train_accuracy"] = *train_accuracy;
  return j;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the combined words.
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ a) ^ b);
}

Model build_model(const TrainConfig& config, const FeatureArchive& archive) {
  Model model(config.model_config(archive.vocabs), config.seed);
  if (!config.embedding_path.empty()) {
    std::mt19937_64 rng(mix_seed(config.seed, 1, 0));
    auto table = encoder::load_pretrained_vectors(config.embedding_path, archive.vocabs.word, config.word_dim, rng);
    std::cerr << "pretrained vectors: " << table.found << " of " << archive.vocabs.word.size() - 2
              << " words covered (" << std::fixed << std::setprecision(4) << table.coverage << ")\n";
    model.set_word_table(table.table);
  }
  return model;
}

void check_archive_matches(const TrainConfig& config, const FeatureArchive& archive) {
  const ArchiveMeta& m = archive.meta;
  if (m.num_views != config.num_views || m.max_rel_pos != config.max_rel_pos || m.dataset != config.dataset) {
    throw ConfigError("cache/config hash mismatch: archive " + m.config_hash().substr(0, 12) + " was built for dataset=" +
                      m.dataset + " num_views=" + std::to_string(m.num_views) + " max_rel_pos=" +
                      std::to_string(m.max_rel_pos) + "; re-run prepare");
  }
}

EvalReport evaluate(const Model& model, std::span<const FeatureBundle> examples, bool use_omp) {
  std::vector<RowVec> logits = use_omp ? kernels::predict_omp(model, examples) : kernels::predict_serial(model, examples);
  std::vector<int> gold, pred;
  gold.reserve(examples.size());
  pred.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    gold.push_back(examples[i].tok.label_id);
    pred.push_back(argmax(logits[i]));
  }
  return compute_report(gold, pred);
}

TrainResult train(const TrainConfig& config, const FeatureArchive& archive, const TrainOptions& opt) {
  config.validate();
  check_archive_matches(config, archive);
  if (config.threads > 0) omp_set_num_threads(config.threads);

  std::vector<const FeatureBundle*> train_set;
  for (const auto& b : archive.train) train_set.push_back(&b);
  if (config.train_subset > 0 && static_cast<std::size_t>(config.train_subset) < train_set.size()) {
    train_set.resize(static_cast<std::size_t>(config.train_subset));
  }
  if (train_set.empty()) throw Error("train: no training examples");
  std::vector<FeatureBundle> train_eval;
  if (opt.eval_train) {
    for (const auto* b : train_set) train_eval.push_back(*b);
  }

  const std::string run = opt.run_name.empty() ? config.dataset : opt.run_name;
  const std::filesystem::path out_dir = config.out_dir;
  const std::filesystem::path best_path = out_dir / (run + ".best.ckpt");
  const std::string config_hash = config.hash();

  TrainResult result;
  Model model = build_model(config, archive);
  Adam adam(model.params(), config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps);
  std::mt19937_64 shuffle_rng(mix_seed(config.seed, 2, 0));
  const double gamma = config.effective_gamma();
  double best_acc = -1.0;
  result.best_model = model;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0, ce_sum = 0.0, se_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<const FeatureBundle*> batch;
      std::vector<std::uint64_t> seeds;
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(train_set[order[k]]);
        seeds.push_back(mix_seed(config.seed, static_cast<std::uint64_t>(epoch), order[k]));
      }
      kernels::BatchRequest req{batch, seeds, true, gamma};
      kernels::BatchResult br = opt.use_omp ? kernels::batch_gradients_omp(model, req)
                                            : kernels::batch_gradients_serial(model, req);
      objective::LossBundle lb;
      try {
        lb = objective::total_loss(br.ce, br.se, gamma);
      } catch (const NumericError& e) {
        if (opt.write_outputs) {
          const auto path = out_dir / (run + ".last_good.ckpt");
          save_checkpoint(path, config, model, epoch, json{{"reason", e.what()}});
          std::cerr << "non-finite loss at epoch " << epoch << "; last good parameters saved to " << path.string() << "\n";
        }
        throw;
      }
      loss_sum += lb.total;
      ce_sum += lb.ce;
      se_sum += lb.se * static_cast<double>(batch.size());
      adam.step(model.params(), br.grads);
    }

    EpochLog log;
    log.epoch = epoch;
    const double n = static_cast<double>(train_set.size());
    log.train_loss = loss_sum / n;
    log.train_ce = ce_sum / n;
    log.train_se = se_sum / n;
    if (opt.eval_train) log.train_accuracy = evaluate(model, train_eval, opt.use_omp).accuracy;
    if (opt.eval_test && !archive.test.empty()) {
      EvalReport rep = evaluate(model, archive.test, opt.use_omp);
      rep.config_hash = config_hash;
      rep.seed = config.seed;
      log.test_accuracy = rep.accuracy;
      log.test_macro_f1 = rep.macro_f1;
      if (rep.accuracy > best_acc) {
        best_acc = rep.accuracy;
        result.best_epoch = epoch;
        result.best_test = rep;
        result.best_model = model;
        if (opt.write_outputs) {
          save_checkpoint(best_path, config, model, epoch, json{{"test", rep.to_json()}, {"feature_hash", archive.meta.config_hash()}});
        }
      }
    }
    log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(log);
    if (opt.verbose) {
      std::cerr << "epoch " << std::setw(3) << epoch << "  loss " << std::fixed << std::setprecision(5) << log.train_loss
                << "  ce " << log.train_ce << "  se " << log.train_se;
      if (log.train_accuracy) std::cerr << "  train_acc " << std::setprecision(4) << *log.train_accuracy;
      if (opt.eval_test) std::cerr << "  test_acc " << std::setprecision(4) << log.test_accuracy << "  test_f1 " << log.test_macro_f1;
      std::cerr << "  (" << std::setprecision(1) << log.seconds << "s)\n";
    }
    if (opt.stop_at_train_accuracy && log.train_accuracy && *log.train_accuracy >= *opt.stop_at_train_accuracy) break;
  }
  result.final_model = model;
  if (!opt.eval_test) result.best_model = model;

  if (opt.write_outputs) {
    json log = json::array();
    for (const auto& e : result.log) log.push_back(e.to_json());
    json doc{{"config", config.to_json()},
             {"config_hash", config_hash},
             {"seed", config.seed},
             {"best_epoch", result.best_epoch},
             {"best_test", result.best_test.to_json()},
             {"epochs", log}};
    write_file_atomic(out_dir / (run + ".log.json"), doc.dump(2) + "\n");
    if (opt.eval_test) {
      result.checkpoint_path = best_path.string();
    } else {
      result.checkpoint_path = (out_dir / (run + ".final.ckpt")).string();
      save_checkpoint(result.checkpoint_path, config, model, static_cast<int>(result.log.size()), json::object());
    }
  }
  return result;
}

TrainResult train(const TrainConfig& config, const TrainOptions& opt) {
  FeatureArchive archive = read_archive(config.feature_dir());
  return train(config, archive, opt);
}

}  // namespace masgcn
