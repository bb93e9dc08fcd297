#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "icupred/baselines.hpp"
#include "icupred/data.hpp"
#include "icupred/metrics.hpp"
#include "icupred/nn.hpp"

namespace icupred::experiment {

inline const std::vector<std::string> kKnownModels = {"lstm", "nb", "lr", "saps2", "sofa"};

struct ExperimentConfig {
  // exactly one input source: files, or the synthetic generator
  std::string cohort_path;
  std::string observations_path;
  std::optional<data::SyntheticConfig> synthetic;

  std::vector<int> frames = {6};
  nn::ModelConfig model;  // seed is superseded by the experiment seed
  std::vector<std::string> models = kKnownModels;
  double test_fraction = 0.2;
  std::uint64_t seed = 1;
  std::string out_dir;

  void validate() const;
};

// Flat `key = value` configuration. Keys: cohort_path, observations_path,
// synthetic.n, synthetic.mortality_rate, synthetic.signal,
// synthetic.missing_rate, frame_hours, hidden_units, dropout_rate,
// learning_rate, epochs, batch_size, folds, test_fraction, seed, models,
// out_dir. Unknown or repeated keys are errors. `#` starts a comment.
ExperimentConfig parse_config_text(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);

// Two-stage output for one stay: los_class is present exactly when the
// mortality decision is positive.
struct StagePrediction {
  std::string stay_id;
  double mortality_probability = 0.0;
  int mortality_decision = 0;
  std::optional<int> los_class;
};

struct BinaryEval {
  metrics::MetricValue f1;
  metrics::MetricValue mcc;
};

struct MulticlassEval {
  metrics::MulticlassAuroc auroc;
};

struct ModelFrameResult {
  std::string model;
  std::vector<BinaryEval> fold_binary;  // validation-fold metrics, fold order
  BinaryEval fold_mean;
  BinaryEval test;
  std::optional<double> test_auroc;
  metrics::RocCurve test_roc;  // empty points when undefined on the test set
  // second stage (lstm only)
  std::vector<std::optional<MulticlassEval>> fold_multiclass;
  std::optional<MulticlassEval> fold_multiclass_mean;
  std::optional<MulticlassEval> test_multiclass;
};

struct TrainCounts {
  std::vector<long long> stage1;  // per-class window counts after undersampling
  std::vector<long long> stage2;  // empty when the stage was not trained
};

struct MulticlassCurves {
  std::array<metrics::RocCurve, 4> per_class;
  std::array<bool, 4> defined{};
  metrics::RocCurve micro;
  std::vector<std::pair<double, double>> macro;  // interpolated mean curve
};

struct FrameResult {
  int frame_hours = 0;
  std::vector<TrainCounts> fold_counts;
  TrainCounts final_counts;
  std::vector<ModelFrameResult> models;
  std::vector<StagePrediction> predictions;  // test stays, cohort order
  std::optional<MulticlassCurves> multiclass_curves;
  std::optional<nn::TrainedModel> lstm_binary;  // final refit models
  std::optional<nn::TrainedModel> lstm_los;
};

struct RunResult {
  ExperimentConfig config;
  int n_stays = 0;  // after exclusions
  int n_test = 0;
  std::vector<int> fold_sizes;
  std::vector<std::pair<std::string, std::string>> fold_manifest;  // stay_id -> role
  std::vector<FrameResult> frames;
};

// Full pipeline: exclusions, hourly grids, seeded test split, K-fold CV with
// per-fold statistics/imputation/normalization and undersampled training
// folds, final refit on the CV pool, evaluation on the untouched test
// partition. Deterministic per (config, data, seed).
RunResult run_experiment(const ExperimentConfig& cfg);

// Writes report.json, folds_manifest.csv, per-model ROC CSVs, two-stage
// prediction CSVs, the multiclass ROC SVG and the refit model dumps.
void emit_report(const RunResult& result, const std::string& out_dir);

}  // namespace icupred::experiment
