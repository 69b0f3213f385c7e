#pragma once

// Data-parallel kernels over independent sentences. Each has a serial
// reference and an OpenMP variant; both produce bit-identical results
// because per-example work is private and reductions run in example order.

#include <cstdint>
#include <span>
#include <vector>

#include "masgcn/archive.h"
#include "masgcn/autograd.h"
#include "masgcn/corpus.h"

namespace masgcn {
class Model;
}

namespace masgcn::kernels {

std::vector<FeatureBundle> compile_serial(std::span<const RawExample> examples,
                                          const Vocabularies& vocabs, int num_views,
                                          int max_rel_pos);
std::vector<FeatureBundle> compile_omp(std::span<const RawExample> examples,
                                       const Vocabularies& vocabs, int num_views,
                                       int max_rel_pos);

struct BatchRequest {
  std::span<const FeatureBundle* const> examples;
  // One dropout seed per example; ignored unless `training`.
  std::span<const std::uint64_t> dropout_seeds;
  bool training = true;
  double gamma = 0.0;
};

struct BatchResult {
  ag::Gradients grads;
  std::vector<double> ce;
  std::vector<double> se;
  std::vector<int> predictions;
};

// Gradient of sum_b ce_b + gamma * mean_b se_b over the batch.
BatchResult batch_gradients_serial(const Model& model, const BatchRequest& req);
BatchResult batch_gradients_omp(const Model& model, const BatchRequest& req);

// Eval-mode logits per example.
std::vector<RowVec> predict_serial(const Model& model, std::span<const FeatureBundle> examples);
std::vector<RowVec> predict_omp(const Model& model, std::span<const FeatureBundle> examples);

// Shared per-example body used by both variants.
struct ExampleGrad {
  ag::Gradients grads;
  double ce = 0.0;
  double se = 0.0;
  int prediction = 0;
};
ExampleGrad example_gradient(const Model& model, const FeatureBundle& ex, bool training,
                             std::uint64_t dropout_seed, double se_weight);

}  // namespace masgcn::kernels
