#include "masgcn/metrics.h"

namespace masgcn {

EvalReport compute_report(std::span<const int> gold, std::span<const int> predicted) {
  if (gold.size() != predicted.size()) throw Error("compute_report: length mismatch");
  EvalReport r;
  r.count = static_cast<int>(gold.size());
  int correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const int g = gold[i], p = predicted[i];
    if (g < 0 || g >= kNumClasses || p < 0 || p >= kNumClasses) throw Error("compute_report: class out of range");
    ++r.confusion[g][p];
    if (g == p) ++correct;
  }
  r.accuracy = r.count ? static_cast<double>(correct) / r.count : 0.0;
  double f1_sum = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    int tp = r.confusion[c][c], gold_c = 0, pred_c = 0;
    for (int k = 0; k < kNumClasses; ++k) {
      gold_c += r.confusion[c][k];
      pred_c += r.confusion[k][c];
    }
    ClassScores& s = r.per_class[c];
    s.precision = pred_c ? static_cast<double>(tp) / pred_c : 0.0;
    s.recall = gold_c ? static_cast<double>(tp) / gold_c : 0.0;
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    f1_sum += s.f1;
  }
  r.macro_f1 = f1_sum / kNumClasses;
  return r;
}

nlohmann::json EvalReport::to_json() const {
  static const char* names[kNumClasses] = {"positive", "negative", "neutral"};
  nlohmann::json pc = nlohmann::json::object();
  for (int c = 0; c < kNumClasses; ++c) {
    pc[names[c]] = {{"precision", per_class[c].precision}, {"recall", per_class[c].recall}, {"f1", per_class[c].f1}};
  }
  nlohmann::json conf = nlohmann::json::array();
  for (const auto& row : confusion) conf.push_back(row);
  return {{"count", count},       {"accuracy", accuracy}, {"macro_f1", macro_f1},  {"per_class", pc},
          {"confusion", conf},    {"config_hash", config_hash}, {"seed", seed}};
}

}  // namespace masgcn
