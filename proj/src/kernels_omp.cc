#include <omp.h>

#include "masgcn/kernels.h"
#include "masgcn/model.h"

namespace masgcn::kernels {

std::vector<FeatureBundle> compile_omp(std::span<const RawExample> examples,
                                       const Vocabularies& vocabs, int num_views,
                                       int max_rel_pos) {
  const auto n = static_cast<std::ptrdiff_t>(examples.size());
  std::vector<FeatureBundle> out(examples.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = make_bundle(examples[i], vocabs, num_views, max_rel_pos);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

BatchResult batch_gradients_omp(const Model& model, const BatchRequest& req) {
  const auto n = static_cast<std::ptrdiff_t>(req.examples.size());
  const double se_weight = n ? req.gamma / static_cast<double>(n) : 0.0;
  std::vector<ExampleGrad> per(req.examples.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const std::uint64_t seed = req.training ? req.dropout_seeds[i] : 0;
      per[i] = example_gradient(model, *req.examples[i], req.training, seed, se_weight);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  BatchResult r;
  r.grads.resize(static_cast<std::size_t>(model.params().size()));
  for (auto& g : per) {
    r.grads.accumulate(g.grads);
    r.ce.push_back(g.ce);
    r.se.push_back(g.se);
    r.predictions.push_back(g.prediction);
  }
  return r;
}

std::vector<RowVec> predict_omp(const Model& model, std::span<const FeatureBundle> examples) {
  const auto n = static_cast<std::ptrdiff_t>(examples.size());
  std::vector<RowVec> out(examples.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = model.predict_logits(examples[i]);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace masgcn::kernels
