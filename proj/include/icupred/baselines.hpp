#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "icupred/matrix.hpp"
#include "icupred/preprocess.hpp"

namespace icupred::baselines {

// Half-open scoring band [lo, hi) -> points.
struct ScoreBand {
  double lo = 0.0;
  double hi = 0.0;
  int points = 0;
};

struct ScoreComponentTable {
  std::string source;  // channel name, or "age"
  std::vector<ScoreBand> bands;
};

// Point tables for the two severity scores, loaded from the versioned
// columnar text format documented in share/score_tables.txt.
struct ScoreTables {
  int version = 0;
  std::vector<ScoreComponentTable> saps2;
  std::vector<ScoreComponentTable> sofa;
  std::map<std::string, std::pair<double, double>> valid_range;

  static ScoreTables parse(std::istream& in);
  static ScoreTables load_file(const std::string& path);
  // The copy embedded at build time from share/score_tables.txt.
  static const ScoreTables& builtin();
};

struct ScoreComponent {
  std::string name;
  int points = 0;
  bool assessed = false;
};

struct ScoreBreakdown {
  std::vector<ScoreComponent> components;
  int total = 0;
  std::optional<double> mortality_probability;  // SAPS-II only
};

// Partial SAPS-II over heart rate, systolic BP, temperature, GCS, BUN, WBC,
// bilirubin and age; the worst observed in-window value scores each
// component, unobserved or uncovered components count 0 and are reported as
// not assessed. The probability applies the published logistic transform to
// the partial total. Expects un-normalized physical units.
ScoreBreakdown saps2_score(const preprocess::ChannelGrid& raw_window, double age_years,
                           const ScoreTables& tables = ScoreTables::builtin());

// Partial SOFA over the cardiovascular (MAP), neurological (GCS) and hepatic
// (bilirubin) components; total in [0, 12] for the covered components.
ScoreBreakdown sofa_score(const preprocess::ChannelGrid& raw_window,
                          const ScoreTables& tables = ScoreTables::builtin());

// Gaussian naive Bayes over flattened windows.
struct NbModel {
  int n_classes = 0;
  std::vector<double> priors;
  Matrix mean;      // n_classes x n_features
  Matrix variance;  // floored at 1e-9
};

inline constexpr double kNbVarianceFloor = 1e-9;

NbModel nb_fit(const Matrix& features, std::span<const int> labels, int n_classes);
std::vector<double> nb_predict(const NbModel& model, std::span<const double> x);

// Logistic regression trained by full-batch gradient descent on mean BCE.
// The per-iteration loss must be non-increasing; a violation aborts.
struct LrModel {
  std::vector<double> weights;
  double intercept = 0.0;
};

LrModel lr_fit(const Matrix& features, std::span<const int> labels, double learning_rate = 0.1,
               int iterations = 2000);
double lr_predict(const LrModel& model, std::span<const double> x);

// Decision threshold maximizing F1 (decision: score >= threshold). Candidates
// are midpoints between adjacent distinct scores; ties pick the lowest
// candidate; a single distinct score is returned as-is.
double fit_threshold(std::span<const double> scores, std::span<const int> labels);

}  // namespace icupred::baselines
