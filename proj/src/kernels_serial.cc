#include <random>

#include "masgcn/kernels.h"
#include "masgcn/model.h"
#include "masgcn/objective.h"

namespace masgcn::kernels {

std::vector<FeatureBundle> compile_serial(std::span<const RawExample> examples,
                                          const Vocabularies& vocabs, int num_views,
                                          int max_rel_pos) {
  std::vector<FeatureBundle> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(make_bundle(ex, vocabs, num_views, max_rel_pos));
  return out;
}

ExampleGrad example_gradient(const Model& model, const FeatureBundle& ex, bool training,
                             std::uint64_t dropout_seed, double se_weight) {
  ExampleGrad g;
  ag::Tape tape;
  std::mt19937_64 rng(dropout_seed);
  ForwardOptions opt;
  opt.training = training;
  opt.rng = &rng;
  ForwardOutput out = model.forward(tape, ex, opt);
  ag::Var ce = objective::cross_entropy(out.logits, ex.tok.label_id);
  g.ce = ce.scalar();
  g.se = out.se_loss.scalar();
  g.prediction = argmax(out.logits.value().row(0));
  ag::Var loss = se_weight == 0.0 ? ce : ag::add(ce, ag::scale(out.se_loss, se_weight));
  g.grads.resize(static_cast<std::size_t>(model.params().size()));
  tape.backward(loss, g.grads);
  return g;
}

BatchResult batch_gradients_serial(const Model& model, const BatchRequest& req) {
  const std::size_t n = req.examples.size();
  const double se_weight = n ? req.gamma / static_cast<double>(n) : 0.0;
  BatchResult r;
  r.grads.resize(static_cast<std::size_t>(model.params().size()));
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t seed = req.training ? req.dropout_seeds[i] : 0;
    ExampleGrad g = example_gradient(model, *req.examples[i], req.training, seed, se_weight);
    r.grads.accumulate(g.grads);
    r.ce.push_back(g.ce);
    r.se.push_back(g.se);
    r.predictions.push_back(g.prediction);
  }
  return r;
}

std::vector<RowVec> predict_serial(const Model& model, std::span<const FeatureBundle> examples) {
  std::vector<RowVec> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(model.predict_logits(ex));
  return out;
}

}  // namespace masgcn::kernels
