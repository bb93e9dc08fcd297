#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "icupred/metrics.hpp"
#include "icupred/prng.hpp"

using namespace icupred;
using namespace icupred::metrics;

namespace {

// Mann-Whitney with ties counted one half; the independent AUC oracle.
double pairwise_auc(std::span<const double> scores, std::span<const int> labels) {
  double wins = 0.0;
  long long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

}  // namespace

TEST_CASE("confusion matrix counts cells directly") {
  const std::vector<int> t1 = {1, 0}, p1 = {1, 0};
  auto cm = confusion_matrix(t1, p1, 2);
  CHECK(cm.at(0, 0) == 1);
  CHECK(cm.at(1, 1) == 1);
  CHECK(cm.at(0, 1) == 0);
  CHECK(cm.total() == 2);

  const std::vector<int> t2 = {0, 0, 1, 1}, p2 = {0, 1, 1, 1};
  cm = confusion_matrix(t2, p2, 2);
  CHECK(cm.at(0, 0) == 1);  // TN
  CHECK(cm.at(0, 1) == 1);  // FP
  CHECK(cm.at(1, 0) == 0);  // FN
  CHECK(cm.at(1, 1) == 2);  // TP

  cm = confusion_matrix(std::vector<int>{}, std::vector<int>{}, 3);
  CHECK(cm.total() == 0);

  const std::vector<int> bad = {3}, ok = {0};
  CHECK_THROWS_AS(confusion_matrix(bad, ok, 2), ValidationError);
}

TEST_CASE("f1 follows the stated conventions") {
  auto cm = confusion_matrix(std::vector<int>{1, 1, 0, 0}, std::vector<int>{1, 1, 0, 0}, 2);
  CHECK(f1_binary(cm).value == 1.0);
  CHECK_FALSE(f1_binary(cm).degenerate);

  // TP=2, FP=1, FN=1 -> P=R=2/3
  cm = ConfusionMatrix(2);
  cm.at(1, 1) = 2;
  cm.at(0, 1) = 1;
  cm.at(1, 0) = 1;
  CHECK(f1_binary(cm).value == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // all-negative predictions with positives present
  cm = confusion_matrix(std::vector<int>{1, 1, 0}, std::vector<int>{0, 0, 0}, 2);
  CHECK(f1_binary(cm).value == 0.0);
  CHECK_FALSE(f1_binary(cm).degenerate);

  // no positives anywhere
  cm = confusion_matrix(std::vector<int>{0, 0}, std::vector<int>{0, 0}, 2);
  CHECK(f1_binary(cm).value == 0.0);
  CHECK(f1_binary(cm).degenerate);
}

TEST_CASE("mcc follows the stated conventions") {
  auto cm = confusion_matrix(std::vector<int>{1, 0, 1, 0}, std::vector<int>{1, 0, 1, 0}, 2);
  CHECK(mcc_binary(cm).value == 1.0);

  cm = confusion_matrix(std::vector<int>{1, 0, 1, 0}, std::vector<int>{0, 1, 0, 1}, 2);
  CHECK(mcc_binary(cm).value == -1.0);

  cm = confusion_matrix(std::vector<int>{1, 0, 1, 0}, std::vector<int>{1, 1, 1, 1}, 2);
  CHECK(mcc_binary(cm).value == 0.0);
  CHECK(mcc_binary(cm).degenerate);
}

TEST_CASE("mcc is invariant under swapping class roles") {
  RngStream rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<int> t(30), p(30);
    for (int i = 0; i < 30; ++i) {
      t[i] = static_cast<int>(rng.uniform_int(2));
      p[i] = static_cast<int>(rng.uniform_int(2));
    }
    std::vector<int> t_swapped(30), p_swapped(30);
    for (int i = 0; i < 30; ++i) {
      t_swapped[i] = 1 - t[i];
      p_swapped[i] = 1 - p[i];
    }
    const auto a = mcc_binary(confusion_matrix(t, p, 2));
    const auto b = mcc_binary(confusion_matrix(t_swapped, p_swapped, 2));
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
    CHECK(a.degenerate == b.degenerate);
  }
}

TEST_CASE("roc curve endpoints, ties and the stated examples") {
  const std::vector<double> perfect = {0.9, 0.8, 0.2, 0.1};
  const std::vector<int> labels = {1, 1, 0, 0};
  auto roc = roc_curve(perfect, labels);
  CHECK(roc.auc == 1.0);
  CHECK(roc.points.front() == std::pair{0.0, 0.0});
  CHECK(roc.points.back() == std::pair{1.0, 1.0});

  const std::vector<double> flat = {0.5, 0.5, 0.5, 0.5};
  roc = roc_curve(flat, labels);
  CHECK(roc.auc == 0.5);
  REQUIRE(roc.points.size() == 2);
  CHECK(roc.points[1] == std::pair{1.0, 1.0});

  const std::vector<double> mixed = {0.9, 0.8, 0.3};
  const std::vector<int> mixed_labels = {1, 0, 1};
  CHECK(roc_curve(mixed, mixed_labels).auc == 0.5);

  const std::vector<int> single = {1, 1, 1};
  CHECK_THROWS_AS(roc_curve(mixed, single), ValidationError);
}

TEST_CASE("roc coordinates are non-decreasing and transform-invariant") {
  RngStream rng(14);
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 2 + static_cast<int>(rng.uniform_int(30));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool has0 = false, has1 = false;
    for (int i = 0; i < n; ++i) {
      scores[i] = std::round(rng.uniform(0.0, 1.0) * 8) / 8.0;  // force ties
      labels[i] = static_cast<int>(rng.uniform_int(2));
      (labels[i] ? has1 : has0) = true;
    }
    if (!has0 || !has1) continue;
    const auto roc = roc_curve(scores, labels);
    for (std::size_t k = 1; k < roc.points.size(); ++k) {
      CHECK(roc.points[k].first >= roc.points[k - 1].first);
      CHECK(roc.points[k].second >= roc.points[k - 1].second);
    }
    auto transformed = scores;
    for (double& s : transformed) s = std::exp(3.0 * s) + 1.0;  // strictly increasing
    CHECK(roc_curve(transformed, labels).auc == doctest::Approx(roc.auc).epsilon(1e-12));
  }
}

TEST_CASE("roc auc equals the pairwise win-fraction oracle") {
  RngStream rng(4242);  // fixed seed bank
  int tested = 0;
  while (tested < 300) {
    const int n = 2 + static_cast<int>(rng.uniform_int(11));  // up to 12 samples
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool has0 = false, has1 = false;
    for (int i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.uniform_int(6)) / 5.0;  // heavy ties
      labels[i] = static_cast<int>(rng.uniform_int(2));
      (labels[i] ? has1 : has0) = true;
    }
    if (!has0 || !has1) continue;
    ++tested;
    CHECK(std::abs(roc_curve(scores, labels).auc - pairwise_auc(scores, labels)) < 1e-12);
  }
}

TEST_CASE("multiclass auroc aggregates one-vs-rest curves") {
  Matrix perfect(4, 4);
  std::vector<int> labels = {0, 1, 2, 3};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) perfect.at(i, j) = i == j ? 0.97 : 0.01;
  const auto result = auroc_multiclass(perfect, labels);
  CHECK(result.macro == 1.0);
  CHECK(result.micro == 1.0);
  for (int c = 0; c < 4; ++c) {
    CHECK(result.defined[c]);
    CHECK(result.per_class[c] == 1.0);
  }
  CHECK_FALSE(result.macro_skipped_class);
}

TEST_CASE("multiclass auroc flags absent classes") {
  Matrix probs(4, 4);
  std::vector<int> labels = {0, 1, 0, 1};  // classes 2 and 3 absent
  RngStream rng(2);
  for (int i = 0; i < 4; ++i) {
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) {
      probs.at(i, j) = rng.uniform(0.05, 1.0);
      sum += probs.at(i, j);
    }
    for (int j = 0; j < 4; ++j) probs.at(i, j) /= sum;
  }
  const auto result = auroc_multiclass(probs, labels);
  CHECK(result.macro_skipped_class);
  CHECK(result.defined[0]);
  CHECK(result.defined[1]);
  CHECK_FALSE(result.defined[2]);
  CHECK_FALSE(result.defined[3]);
  CHECK(result.macro == doctest::Approx((result.per_class[0] + result.per_class[1]) / 2.0));
}

TEST_CASE("random uniform probabilities score near one half") {
  const int n = 4000;
  RngStream rng(1001);
  Matrix probs(n, 4);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) {
      probs.at(i, j) = rng.uniform(0.01, 1.0);
      sum += probs.at(i, j);
    }
    for (int j = 0; j < 4; ++j) probs.at(i, j) /= sum;
    labels[i] = i % 4;  // balanced
  }
  const auto result = auroc_multiclass(probs, labels);
  CHECK(std::abs(result.micro - 0.5) < 0.03);
  CHECK(std::abs(result.macro - 0.5) < 0.03);
}

TEST_CASE("multiclass auroc validates its input") {
  Matrix bad(1, 4);
  bad.at(0, 0) = 0.9;  // row sums to 0.9
  const std::vector<int> labels = {0};
  CHECK_THROWS_AS(auroc_multiclass(bad, labels), ValidationError);
}

TEST_CASE("metrics are invariant under sample permutation") {
  RngStream rng(909);
  std::vector<double> scores(40);
  std::vector<int> truth(40), pred(40);
  for (int i = 0; i < 40; ++i) {
    scores[i] = rng.uniform(0.0, 1.0);
    truth[i] = static_cast<int>(rng.uniform_int(2));
    pred[i] = static_cast<int>(rng.uniform_int(2));
  }
  truth[0] = 1;
  truth[1] = 0;  // both classes present

  std::vector<int> order(40);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<double> scores_p(40);
  std::vector<int> truth_p(40), pred_p(40);
  for (int i = 0; i < 40; ++i) {
    scores_p[i] = scores[order[i]];
    truth_p[i] = truth[order[i]];
    pred_p[i] = pred[order[i]];
  }

  const auto cm = confusion_matrix(truth, pred, 2);
  const auto cm_p = confusion_matrix(truth_p, pred_p, 2);
  CHECK(f1_binary(cm).value == f1_binary(cm_p).value);
  CHECK(mcc_binary(cm).value == mcc_binary(cm_p).value);
  CHECK(roc_curve(scores, truth).auc == doctest::Approx(roc_curve(scores_p, truth_p).auc).epsilon(1e-12));

  const double f1 = f1_binary(cm).value;
  const double mcc = mcc_binary(cm).value;
  const double auc = roc_curve(scores, truth).auc;
  CHECK(f1 >= 0.0);
  CHECK(f1 <= 1.0);
  CHECK(mcc >= -1.0);
  CHECK(mcc <= 1.0);
  CHECK(auc >= 0.0);
  CHECK(auc <= 1.0);
}

TEST_CASE("kfold splits are balanced partitions") {
  auto folds = kfold_split(9, 3, 1);
  for (const auto& f : folds) CHECK(f.size() == 3);

  folds = kfold_split(10, 3, 1);
  CHECK(folds[0].size() == 4);
  CHECK(folds[1].size() == 3);
  CHECK(folds[2].size() == 3);

  RngStream rng(77);
  for (int rep = 0; rep < 25; ++rep) {
    const int k = 2 + static_cast<int>(rng.uniform_int(5));
    const int n = k + static_cast<int>(rng.uniform_int(40));
    const auto split = kfold_split(n, k, rng.next_u64());
    std::set<int> seen;
    std::size_t total = 0;
    std::size_t max_size = 0, min_size = n;
    for (const auto& f : split) {
      total += f.size();
      max_size = std::max(max_size, f.size());
      min_size = std::min(min_size, f.size());
      for (int idx : f) CHECK(seen.insert(idx).second);  // disjoint
    }
    CHECK(total == static_cast<std::size_t>(n));  // exhaustive
    CHECK(max_size - min_size <= 1);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == n - 1);
  }

  CHECK(kfold_split(12, 4, 9) == kfold_split(12, 4, 9));
  CHECK_THROWS_AS(kfold_split(2, 3, 1), ValidationError);
}
