#include "icupred/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "icupred/error.hpp"
#include "icupred/prng.hpp"

namespace icupred::metrics {

long long ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0LL);
}

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 int n_classes) {
  if (y_true.size() != y_pred.size())
    throw ValidationError("confusion_matrix: length mismatch");
  ConfusionMatrix cm(n_classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] >= n_classes || y_pred[i] < 0 || y_pred[i] >= n_classes)
      throw ValidationError("confusion_matrix: label out of range at index " + std::to_string(i));
    ++cm.at(y_true[i], y_pred[i]);
  }
  return cm;
}

MetricValue f1_binary(const ConfusionMatrix& cm) {
  if (cm.n_classes != 2) throw ValidationError("f1_binary: expected a 2x2 matrix");
  const double tp = static_cast<double>(cm.at(1, 1));
  const double fp = static_cast<double>(cm.at(0, 1));
  const double fn = static_cast<double>(cm.at(1, 0));
  if (tp == 0.0) return {0.0, fp == 0.0 && fn == 0.0};
  const double precision = tp / (tp + fp);
  const double recall = tp / (tp + fn);
  return {2.0 * precision * recall / (precision + recall), false};
}

MetricValue mcc_binary(const ConfusionMatrix& cm) {
  if (cm.n_classes != 2) throw ValidationError("mcc_binary: expected a 2x2 matrix");
  const double tp = static_cast<double>(cm.at(1, 1));
  const double tn = static_cast<double>(cm.at(0, 0));
  const double fp = static_cast<double>(cm.at(0, 1));
  const double fn = static_cast<double>(cm.at(1, 0));
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0.0) return {0.0, true};
  return {(tp * tn - fp * fn) / std::sqrt(denom), false};
}

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("roc_curve: length mismatch");
  long long pos = 0, neg = 0;
  for (int y : labels) (y == 1 ? pos : neg) += 1;
  if (pos == 0 || neg == 0)
    throw ValidationError("roc_curve: AUC undefined without both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.emplace_back(0.0, 0.0);
  long long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    curve.points.emplace_back(static_cast<double>(fp) / neg, static_cast<double>(tp) / pos);
  }
  double auc = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& [x0, y0] = curve.points[k - 1];
    const auto& [x1, y1] = curve.points[k];
    auc += (x1 - x0) * (y0 + y1) / 2.0;
  }
  curve.auc = auc;
  return curve;
}

MulticlassAuroc auroc_multiclass(const Matrix& probs, std::span<const int> labels) {
  if (probs.cols != 4) throw ValidationError("auroc_multiclass: expected 4 columns");
  if (static_cast<std::size_t>(probs.rows) != labels.size())
    throw ValidationError("auroc_multiclass: row/label count mismatch");
  for (int i = 0; i < probs.rows; ++i) {
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) sum += probs.at(i, j);
    if (std::abs(sum - 1.0) > 1e-6)
      throw ValidationError("auroc_multiclass: row " + std::to_string(i) + " does not sum to 1");
  }

  MulticlassAuroc out;
  std::vector<double> col(probs.rows);
  std::vector<int> onevsrest(probs.rows);
  double macro_sum = 0.0;
  int macro_n = 0;
  for (int c = 0; c < 4; ++c) {
    long long pos = 0;
    for (int i = 0; i < probs.rows; ++i) {
      col[i] = probs.at(i, c);
      onevsrest[i] = labels[i] == c ? 1 : 0;
      pos += onevsrest[i];
    }
    if (pos == 0 || pos == probs.rows) {
      out.defined[c] = false;
      out.macro_skipped_class = true;
      continue;
    }
    out.per_class[c] = roc_curve(col, onevsrest).auc;
    out.defined[c] = true;
    macro_sum += out.per_class[c];
    ++macro_n;
  }
  if (macro_n == 0) throw ValidationError("auroc_multiclass: no class has a defined AUROC");
  out.macro = macro_sum / macro_n;

  // micro: pool every (probability, one-hot) pair into one binary problem
  std::vector<double> pooled_scores;
  std::vector<int> pooled_labels;
  pooled_scores.reserve(static_cast<std::size_t>(probs.rows) * 4);
  pooled_labels.reserve(static_cast<std::size_t>(probs.rows) * 4);
  for (int i = 0; i < probs.rows; ++i)
    for (int c = 0; c < 4; ++c) {
      pooled_scores.push_back(probs.at(i, c));
      pooled_labels.push_back(labels[i] == c ? 1 : 0);
    }
  out.micro = roc_curve(pooled_scores, pooled_labels).auc;
  return out;
}

std::vector<std::vector<int>> kfold_split(int n, int k, std::uint64_t seed) {
  if (k < 1) throw ValidationError("kfold_split: k must be positive");
  if (n < k) throw ValidationError("kfold_split: n < k");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(seed);
  rng.shuffle(order);

  std::vector<std::vector<int>> folds(k);
  const int base = n / k, extra = n % k;
  int pos = 0;
  for (int f = 0; f < k; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + pos, order.begin() + pos + size);
    pos += size;
  }
  return folds;
}

}  // namespace icupred::metrics
