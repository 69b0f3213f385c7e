#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <random>
#include <vector>

#include "masgcn/archive.h"
#include "masgcn/corpus.h"
#include "masgcn/model.h"

namespace fx {

using namespace masgcn;

// Uniform random recursive tree over shuffled positions; heads[root] = -1.
std::vector<int> random_heads(int n, std::mt19937_64& rng);

// Random sentence over small word/tag/label inventories.
RawExample random_example(int n, std::mt19937_64& rng);

// Brute-force all-pairs shortest paths on the undirected tree.
IntMat floyd_warshall(const std::vector<int>& heads);

struct Toy {
  Vocabularies vocabs;
  std::vector<RawExample> raw;
  std::vector<FeatureBundle> bundles;
  ModelConfig config;
};

// Small corpus with a tiny model configuration (D = 8).
Toy toy(int count, int min_n, int max_n, int num_views, std::uint64_t seed, int num_layers = 2);

struct MetricOracle {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::array<double, 3> f1{};
};
MetricOracle metric_oracle(const std::vector<int>& gold, const std::vector<int>& pred);

double rel_error(double analytic, double numeric);

// Single-example eval-mode objective: ce + gamma * se.
double example_loss(const Model& model, const FeatureBundle& ex, double gamma);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace fx

namespace fx {

struct FdEntry {
  std::string param;
  int row = 0;
  int col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel = 0.0;
};

// Central differences of example_loss against the tape gradient for
// `per_param` random entries of each named parameter.
std::vector<FdEntry> model_fd_check(Model& model, const FeatureBundle& ex, double gamma,
                                    const std::vector<std::string>& names, int per_param,
                                    std::uint64_t seed, double step = 1e-5);

}  // namespace fx

#include "masgcn/config.h"

namespace fx {

// In-memory archive over the generated corpus.
FeatureArchive synthetic_archive(int train_n, int test_n, int num_views, std::uint64_t seed,
                                 const std::string& dataset = "synthetic", int max_rel_pos = 40);

// Narrow model so training tests run in seconds.
TrainConfig small_config(const std::filesystem::path& out_dir, const std::string& dataset = "synthetic");

}  // namespace fx
