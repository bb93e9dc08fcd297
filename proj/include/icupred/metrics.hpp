#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "icupred/error.hpp"
#include "icupred/matrix.hpp"

namespace icupred::metrics {

struct ConfusionMatrix {
  int n_classes = 0;
  std::vector<long long> counts;  // row-major, rows = true class, cols = predicted

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int n) : n_classes(n), counts(static_cast<std::size_t>(n) * n, 0) {}

  long long& at(int t, int p) { return counts[static_cast<std::size_t>(t) * n_classes + p]; }
  long long at(int t, int p) const { return counts[static_cast<std::size_t>(t) * n_classes + p]; }
  long long total() const;
};

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 int n_classes);

// Value plus a machine-readable flag for zero-denominator conventions.
struct MetricValue {
  double value = 0.0;
  bool degenerate = false;
};

// Positive class is 1. TP=FP=FN=0 yields 0 with the degenerate flag.
MetricValue f1_binary(const ConfusionMatrix& cm);

// Any zero marginal factor yields 0 with the degenerate flag.
MetricValue mcc_binary(const ConfusionMatrix& cm);

// ROC by descending-score threshold sweep; tied scores collapse into one
// step. auc is the trapezoidal area, equal to the Mann-Whitney statistic with
// ties counted one half.
struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr), (0,0) .. (1,1)
  double auc = 0.0;
};

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

struct MulticlassAuroc {
  double macro = 0.0;
  double micro = 0.0;
  std::array<double, 4> per_class{};
  std::array<bool, 4> defined{};  // false when the class is absent
  bool macro_skipped_class = false;
};

// One-vs-rest AUROCs from an N x 4 probability matrix (rows sum to 1).
// macro is the unweighted mean of the defined per-class values; micro pools
// all (score, one-hot label) pairs into a single curve.
MulticlassAuroc auroc_multiclass(const Matrix& probs, std::span<const int> labels);

// Seeded shuffle, then contiguous partition with sizes differing by at most
// one (larger folds first).
std::vector<std::vector<int>> kfold_split(int n, int k, std::uint64_t seed);

}  // namespace icupred::metrics
