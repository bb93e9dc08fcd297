#include "icupred/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>

#include "icupred/preprocess.hpp"
#include "icupred/prng.hpp"

namespace icupred::experiment {

using data::CohortEntry;
using data::RawObservation;
using preprocess::ChannelGrid;
using preprocess::ChannelStats;
using preprocess::LabeledWindow;

namespace {

// Sub-stream tags; every fold additionally owns the stream seed ^ fold_index.
constexpr std::uint64_t kTagSplit = 0x5350;
constexpr std::uint64_t kTagFolds = 0x464c;
constexpr std::uint64_t kTagUnderStage1 = 0x5531;
constexpr std::uint64_t kTagUnderStage2 = 0x5532;
constexpr std::uint64_t kTagTrainStage1 = 0x5431;
constexpr std::uint64_t kTagTrainStage2 = 0x5432;

template <typename F>
auto stage(const std::string& name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw Error(name + ": " + e.what());
  }
}

double parse_number(const std::string& value, const std::string& key, std::size_t line_no) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ValidationError("config line " + std::to_string(line_no) + ": malformed number for '" +
                          key + "'");
  return out;
}

long long parse_integer(const std::string& value, const std::string& key, std::size_t line_no) {
  const double v = parse_number(value, key, line_no);
  if (v != std::floor(v))
    throw ValidationError("config line " + std::to_string(line_no) + ": '" + key +
                          "' must be an integer");
  return static_cast<long long>(v);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t pos = value.find(',', start);
    if (pos == std::string::npos) pos = value.size();
    std::string item = value.substr(start, pos - start);
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
    start = pos + 1;
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

void ExperimentConfig::validate() const {
  const bool has_files = !cohort_path.empty() || !observations_path.empty();
  if (synthetic && has_files)
    throw ValidationError("config: specify input files or synthetic.*, not both");
  if (!synthetic && (cohort_path.empty() || observations_path.empty()))
    throw ValidationError("config: cohort_path and observations_path (or synthetic.n) required");
  if (synthetic) synthetic->validate();
  if (frames.empty()) throw ValidationError("config: frame_hours must not be empty");
  for (int f : frames)
    if (!preprocess::valid_frame_hours(f))
      throw ValidationError("config: frame_hours must be one of 6, 12, 24");
  if (test_fraction <= 0.0 || test_fraction > 0.5)
    throw ValidationError("config: test_fraction must be in (0, 0.5]");
  if (models.empty()) throw ValidationError("config: models must not be empty");
  for (const auto& m : models)
    if (std::find(kKnownModels.begin(), kKnownModels.end(), m) == kKnownModels.end())
      throw ValidationError("config: unknown model '" + m + "'");
  if (out_dir.empty()) throw ValidationError("config: out_dir required");
  if (model.folds < 2) throw ValidationError("config: cross-validation requires folds >= 2");
  model.validate();
}

ExperimentConfig parse_config_text(std::istream& in) {
  ExperimentConfig cfg;
  std::optional<long long> syn_n;
  std::optional<double> syn_mortality, syn_signal, syn_missing;

  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (!seen.insert(key).second)
      throw ValidationError("config line " + std::to_string(line_no) + ": repeated key '" + key +
                            "'");

    if (key == "cohort_path") cfg.cohort_path = value;
    else if (key == "observations_path") cfg.observations_path = value;
    else if (key == "synthetic.n") syn_n = parse_integer(value, key, line_no);
    else if (key == "synthetic.mortality_rate") syn_mortality = parse_number(value, key, line_no);
    else if (key == "synthetic.signal") syn_signal = parse_number(value, key, line_no);
    else if (key == "synthetic.missing_rate") syn_missing = parse_number(value, key, line_no);
    else if (key == "frame_hours") {
      cfg.frames.clear();
      for (const auto& item : split_list(value))
        cfg.frames.push_back(static_cast<int>(parse_integer(item, key, line_no)));
    } else if (key == "hidden_units")
      cfg.model.hidden_units = static_cast<int>(parse_integer(value, key, line_no));
    else if (key == "dropout_rate") cfg.model.dropout_rate = parse_number(value, key, line_no);
    else if (key == "learning_rate") cfg.model.learning_rate = parse_number(value, key, line_no);
    else if (key == "epochs") cfg.model.epochs = static_cast<int>(parse_integer(value, key, line_no));
    else if (key == "batch_size")
      cfg.model.batch_size = static_cast<int>(parse_integer(value, key, line_no));
    else if (key == "folds") cfg.model.folds = static_cast<int>(parse_integer(value, key, line_no));
    else if (key == "test_fraction") cfg.test_fraction = parse_number(value, key, line_no);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_integer(value, key, line_no));
    else if (key == "models") {
      cfg.models = split_list(value);
    } else if (key == "out_dir")
      cfg.out_dir = value;
    else
      throw ValidationError("config line " + std::to_string(line_no) + ": unknown key '" + key +
                            "'");
  }
  if (syn_n || syn_mortality || syn_signal || syn_missing) {
    data::SyntheticConfig syn;
    syn.n_stays = static_cast<int>(syn_n.value_or(0));
    syn.mortality_rate = syn_mortality.value_or(0.3);
    syn.frame_signal_strength = syn_signal.value_or(3.0);
    syn.missing_rate = syn_missing.value_or(0.1);
    cfg.synthetic = syn;
  }
  cfg.model.seed = cfg.seed;
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  return parse_config_text(in);
}

namespace {

struct StayTable {
  std::vector<CohortEntry> cohort;
  std::vector<int> mortality;                 // per stay
  std::vector<std::optional<int>> los_class;  // present iff non-survivor with death > 0
  std::vector<ChannelGrid> raw;               // current frame, unfilled
  std::vector<ChannelGrid> interp;            // after linear interpolation
};

Matrix flatten_windows(const std::vector<LabeledWindow>& windows) {
  const int n = static_cast<int>(windows.size());
  const int d = windows.empty() ? 0 : windows[0].grid.frame_hours * data::kNumChannels;
  Matrix out(n, d);
  for (int i = 0; i < n; ++i)
    std::copy(windows[i].grid.values.data.begin(), windows[i].grid.values.data.end(), out.row(i));
  return out;
}

BinaryEval eval_binary(std::span<const int> truth, std::span<const int> decisions) {
  const auto cm = metrics::confusion_matrix(truth, decisions, 2);
  return {metrics::f1_binary(cm), metrics::mcc_binary(cm)};
}

std::optional<metrics::RocCurve> roc_or_none(std::span<const double> scores,
                                             std::span<const int> labels) {
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (!has_pos || !has_neg) return std::nullopt;
  return metrics::roc_curve(scores, labels);
}

// Linear interpolation of a (non-decreasing) ROC polyline at abscissa x.
double tpr_at(const metrics::RocCurve& curve, double x) {
  const auto& pts = curve.points;
  if (pts.empty()) return 0.0;
  if (x <= pts.front().first) return pts.front().second;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    if (pts[k].first >= x) {
      const auto& [x0, y0] = pts[k - 1];
      const auto& [x1, y1] = pts[k];
      if (x1 == x0) return y1;
      return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
  }
  return pts.back().second;
}

// Everything one training/evaluation round needs. For fold k the evaluation
// set is the held-out fold; for the final round it is the test partition.
struct RoundContext {
  std::uint64_t fold_seed = 0;
  ChannelStats stats;
  std::vector<LabeledWindow> train;      // natural class balance
  std::vector<LabeledWindow> train_bal;  // stage-1 undersampled
  std::vector<LabeledWindow> stage2_train;
  std::vector<LabeledWindow> stage2_bal;
  std::vector<LabeledWindow> eval;
  std::vector<int> eval_stays;  // cohort indices aligned with eval
};

LabeledWindow make_window(const StayTable& stays, int i, const ChannelStats& stats) {
  LabeledWindow w;
  w.grid = preprocess::normalize_zscore(preprocess::impute_mean(stays.interp[i], stats), stats);
  w.mortality_label = stays.mortality[i];
  w.los_class = stays.los_class[i];
  return w;
}

RoundContext build_round(const StayTable& stays, const std::vector<int>& train_stays,
                         const std::vector<int>& eval_stays, std::uint64_t fold_seed) {
  RoundContext ctx;
  ctx.fold_seed = fold_seed;
  std::vector<ChannelGrid> train_grids;
  train_grids.reserve(train_stays.size());
  for (int i : train_stays) train_grids.push_back(stays.interp[i]);
  ctx.stats = preprocess::compute_channel_stats(train_grids);

  for (int i : train_stays) ctx.train.push_back(make_window(stays, i, ctx.stats));
  for (int i : eval_stays) ctx.eval.push_back(make_window(stays, i, ctx.stats));
  ctx.eval_stays = eval_stays;

  ctx.train_bal = preprocess::undersample(
      ctx.train, [](const LabeledWindow& w) { return w.mortality_label; },
      derive_seed(fold_seed, kTagUnderStage1));
  for (const auto& w : ctx.train)
    if (w.los_class) ctx.stage2_train.push_back(w);
  if (!ctx.stage2_train.empty())
    ctx.stage2_bal = preprocess::undersample(
        ctx.stage2_train, [](const LabeledWindow& w) { return *w.los_class; },
        derive_seed(fold_seed, kTagUnderStage2));
  return ctx;
}

std::vector<long long> class_counts(const std::vector<LabeledWindow>& windows, int n_classes,
                                    bool use_los) {
  std::vector<long long> counts(n_classes, 0);
  for (const auto& w : windows) ++counts[use_los ? *w.los_class : w.mortality_label];
  return counts;
}

std::optional<MulticlassEval> eval_multiclass(const nn::TrainedModel& model,
                                              const RoundContext& ctx,
                                              Matrix* probs_out = nullptr,
                                              std::vector<int>* labels_out = nullptr) {
  std::vector<const LabeledWindow*> subjects;
  for (const auto& w : ctx.eval)
    if (w.los_class) subjects.push_back(&w);
  if (subjects.empty()) return std::nullopt;

  Matrix probs(static_cast<int>(subjects.size()), 4);
  std::vector<int> labels(subjects.size());
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const auto p = nn::predict(model, subjects[i]->grid);
    std::copy(p.begin(), p.end(), probs.row(static_cast<int>(i)));
    labels[i] = *subjects[i]->los_class;
  }
  try {
    MulticlassEval eval{metrics::auroc_multiclass(probs, labels)};
    if (probs_out) *probs_out = probs;
    if (labels_out) *labels_out = labels;
    return eval;
  } catch (const ValidationError&) {
    return std::nullopt;  // evaluation set too degenerate for any AUROC
  }
}

MulticlassCurves build_multiclass_curves(const Matrix& probs, const std::vector<int>& labels) {
  MulticlassCurves curves;
  std::vector<double> col(probs.rows);
  std::vector<int> ovr(probs.rows);
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < probs.rows; ++i) {
      col[i] = probs.at(i, c);
      ovr[i] = labels[i] == c ? 1 : 0;
    }
    if (auto roc = roc_or_none(col, ovr)) {
      curves.per_class[c] = *roc;
      curves.defined[c] = true;
    }
  }
  std::vector<double> pooled_scores;
  std::vector<int> pooled_labels;
  for (int i = 0; i < probs.rows; ++i)
    for (int c = 0; c < 4; ++c) {
      pooled_scores.push_back(probs.at(i, c));
      pooled_labels.push_back(labels[i] == c ? 1 : 0);
    }
  curves.micro = metrics::roc_curve(pooled_scores, pooled_labels);

  for (int k = 0; k <= 100; ++k) {
    const double x = k / 100.0;
    double sum = 0.0;
    int n = 0;
    for (int c = 0; c < 4; ++c)
      if (curves.defined[c]) {
        sum += tpr_at(curves.per_class[c], x);
        ++n;
      }
    curves.macro.emplace_back(x, n > 0 ? sum / n : 0.0);
  }
  return curves;
}

std::optional<MulticlassEval> multiclass_mean_of(
    const std::vector<std::optional<MulticlassEval>>& folds) {
  MulticlassEval mean;
  int n = 0;
  std::array<int, 4> class_n{};
  for (const auto& fold : folds) {
    if (!fold) continue;
    ++n;
    mean.auroc.micro += fold->auroc.micro;
    mean.auroc.macro += fold->auroc.macro;
    mean.auroc.macro_skipped_class =
        mean.auroc.macro_skipped_class || fold->auroc.macro_skipped_class;
    for (int c = 0; c < 4; ++c)
      if (fold->auroc.defined[c]) {
        mean.auroc.per_class[c] += fold->auroc.per_class[c];
        ++class_n[c];
      }
  }
  if (n == 0) return std::nullopt;
  mean.auroc.micro /= n;
  mean.auroc.macro /= n;
  for (int c = 0; c < 4; ++c) {
    mean.auroc.defined[c] = class_n[c] > 0;
    if (class_n[c] > 0) mean.auroc.per_class[c] /= class_n[c];
  }
  return mean;
}

BinaryEval mean_of(const std::vector<BinaryEval>& folds) {
  BinaryEval mean;
  if (folds.empty()) return mean;
  for (const auto& f : folds) {
    mean.f1.value += f.f1.value;
    mean.mcc.value += f.mcc.value;
    mean.f1.degenerate = mean.f1.degenerate || f.f1.degenerate;
    mean.mcc.degenerate = mean.mcc.degenerate || f.mcc.degenerate;
  }
  mean.f1.value /= static_cast<double>(folds.size());
  mean.mcc.value /= static_cast<double>(folds.size());
  return mean;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();

  RunResult result;
  result.config = cfg;

  // --- load and filter ---------------------------------------------------
  StayTable stays;
  std::vector<RawObservation> observations;
  stage("load", [&] {
    if (cfg.synthetic) {
      data::SyntheticConfig syn = *cfg.synthetic;
      syn.seed = cfg.seed;
      auto generated = data::generate_synthetic_cohort(syn);
      stays.cohort = std::move(generated.cohort);
      observations = std::move(generated.observations);
    } else {
      std::ifstream cohort_file(cfg.cohort_path);
      if (!cohort_file) throw Error("cannot open cohort file '" + cfg.cohort_path + "'");
      stays.cohort = data::parse_cohort(cohort_file);
      std::ifstream obs_file(cfg.observations_path);
      if (!obs_file) throw Error("cannot open observations file '" + cfg.observations_path + "'");
      observations = data::parse_observations(obs_file);
    }
  });

  stays.cohort = preprocess::apply_exclusions(stays.cohort);
  const int n = static_cast<int>(stays.cohort.size());
  if (n < cfg.model.folds + 2)
    throw Error("too few stays after exclusions (" + std::to_string(n) + ")");
  result.n_stays = n;

  std::unordered_map<std::string, std::vector<RawObservation>> obs_by_stay;
  for (auto& obs : observations) obs_by_stay[obs.stay_id].push_back(std::move(obs));

  stays.mortality.resize(n);
  stays.los_class.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& entry = stays.cohort[i];
    stays.mortality[i] = preprocess::label_mortality(entry);
    if (stays.mortality[i] == 1 && *entry.death_time_hours > 0.0)
      stays.los_class[i] = preprocess::label_los(entry);
  }

  // --- seeded split: held-out test, then K folds over the pool ------------
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  RngStream split_rng(derive_seed(cfg.seed, kTagSplit));
  split_rng.shuffle(order);

  const int n_test = std::clamp(static_cast<int>(std::llround(n * cfg.test_fraction)), 1,
                                n - cfg.model.folds);
  std::vector<int> test_stays(order.begin(), order.begin() + n_test);
  std::vector<int> pool(order.begin() + n_test, order.end());
  result.n_test = n_test;

  const auto folds = metrics::kfold_split(static_cast<int>(pool.size()), cfg.model.folds,
                                          derive_seed(cfg.seed, kTagFolds));
  std::vector<std::string> role(n);
  for (int i : test_stays) role[i] = "test";
  for (std::size_t f = 0; f < folds.size(); ++f) {
    result.fold_sizes.push_back(static_cast<int>(folds[f].size()));
    for (int j : folds[f]) role[pool[j]] = "fold_" + std::to_string(f);
  }
  for (int i = 0; i < n; ++i) result.fold_manifest.emplace_back(stays.cohort[i].stay_id, role[i]);

  const auto has_model = [&](const char* name) {
    return std::find(cfg.models.begin(), cfg.models.end(), name) != cfg.models.end();
  };
  std::unordered_map<std::string, int> stay_index;
  for (int i = 0; i < n; ++i) stay_index[stays.cohort[i].stay_id] = i;

  // --- per-frame experiments ----------------------------------------------
  for (int frame : cfg.frames) {
    FrameResult fr;
    fr.frame_hours = frame;

    stays.raw.assign(n, ChannelGrid{});
    stays.interp.assign(n, ChannelGrid{});
    for (int i = 0; i < n; ++i) {
      stage("grid frame " + std::to_string(frame) + " stay " + stays.cohort[i].stay_id, [&] {
        const auto it = obs_by_stay.find(stays.cohort[i].stay_id);
        static const std::vector<RawObservation> kNone;
        stays.raw[i] = preprocess::resample_to_grid(it != obs_by_stay.end() ? it->second : kNone,
                                                    frame);
        stays.raw[i].stay_id = stays.cohort[i].stay_id;
        stays.interp[i] = preprocess::interpolate_linear(stays.raw[i]);
      });
    }

    for (const auto& name : cfg.models) {
      ModelFrameResult mr;
      mr.model = name;
      fr.models.push_back(std::move(mr));
    }
    auto model_result = [&](const char* name) -> ModelFrameResult& {
      for (auto& m : fr.models)
        if (m.model == name) return m;
      throw Error("internal: model result missing");
    };

    // Round f < K trains on the pool minus fold f and evaluates on fold f;
    // round K is the final refit on the whole pool, evaluated on test.
    const int K = cfg.model.folds;
    for (int f = 0; f <= K; ++f) {
      const bool final_round = f == K;
      std::vector<int> train_stays;
      std::vector<int> eval_stays;
      if (final_round) {
        for (int j : pool) train_stays.push_back(j);
        eval_stays = test_stays;
      } else {
        for (std::size_t g = 0; g < folds.size(); ++g)
          if (static_cast<int>(g) != f)
            for (int j : folds[g]) train_stays.push_back(pool[j]);
        for (int j : folds[f]) eval_stays.push_back(pool[j]);
      }

      const std::string round_name =
          "frame " + std::to_string(frame) + (final_round ? " final" : " fold " + std::to_string(f));
      RoundContext ctx = stage(round_name + " preprocess", [&] {
        return build_round(stays, train_stays, eval_stays, cfg.seed ^ static_cast<std::uint64_t>(f));
      });

      TrainCounts counts;
      counts.stage1 = class_counts(ctx.train_bal, 2, false);
      if (!ctx.stage2_bal.empty()) counts.stage2 = class_counts(ctx.stage2_bal, 4, true);
      if (final_round)
        fr.final_counts = counts;
      else
        fr.fold_counts.push_back(counts);

      std::vector<int> eval_truth;
      for (const auto& w : ctx.eval) eval_truth.push_back(w.mortality_label);

      // --- LSTM (two stages) ---
      if (has_model("lstm")) {
        auto& out = model_result("lstm");
        nn::ModelConfig mc = cfg.model;
        mc.seed = derive_seed(ctx.fold_seed, kTagTrainStage1);
        const nn::TrainedModel stage1 = stage(round_name + " lstm stage-1 train", [&] {
          return nn::train(ctx.train_bal, nn::Task::binary, mc, ctx.stats);
        });

        std::vector<double> probs(ctx.eval.size());
        std::vector<int> decisions(ctx.eval.size());
        for (std::size_t i = 0; i < ctx.eval.size(); ++i) {
          probs[i] = nn::predict(stage1, ctx.eval[i].grid)[0];
          decisions[i] = nn::decide_binary(probs[i]);
        }

        std::optional<nn::TrainedModel> stage2;
        if (!ctx.stage2_bal.empty()) {
          nn::ModelConfig mc2 = cfg.model;
          mc2.seed = derive_seed(ctx.fold_seed, kTagTrainStage2);
          stage2 = stage(round_name + " lstm stage-2 train", [&] {
            return nn::train(ctx.stage2_bal, nn::Task::multiclass4, mc2, ctx.stats);
          });
        }

        if (!final_round) {
          out.fold_binary.push_back(eval_binary(eval_truth, decisions));
          out.fold_multiclass.push_back(stage2 ? eval_multiclass(*stage2, ctx) : std::nullopt);
        } else {
          out.test = eval_binary(eval_truth, decisions);
          if (auto roc = roc_or_none(probs, eval_truth)) {
            out.test_roc = *roc;
            out.test_auroc = roc->auc;
          }
          if (stage2) {
            Matrix mc_probs;
            std::vector<int> mc_labels;
            out.test_multiclass = eval_multiclass(*stage2, ctx, &mc_probs, &mc_labels);
            if (out.test_multiclass)
              fr.multiclass_curves = build_multiclass_curves(mc_probs, mc_labels);
          }
          // two-stage gated predictions for every test stay
          for (std::size_t i = 0; i < ctx.eval.size(); ++i) {
            StagePrediction pred;
            pred.stay_id = ctx.eval[i].grid.stay_id;
            pred.mortality_probability = probs[i];
            pred.mortality_decision = decisions[i];
            if (pred.mortality_decision == 1) {
              if (!stage2)
                throw Error("stage-2: no trained LOS model for positive decision on stay " +
                            pred.stay_id + " (training pool has no usable non-survivors)");
              const auto p4 = nn::predict(*stage2, ctx.eval[i].grid);
              pred.los_class = nn::decide_multiclass(p4);
            }
            fr.predictions.push_back(std::move(pred));
          }
          fr.lstm_binary = stage1;
          fr.lstm_los = stage2;
        }
      }

      // --- Gaussian naive Bayes ---
      if (has_model("nb")) {
        auto& out = model_result("nb");
        const Matrix train_x = flatten_windows(ctx.train_bal);
        std::vector<int> train_y;
        for (const auto& w : ctx.train_bal) train_y.push_back(w.mortality_label);
        const auto nb = stage(round_name + " nb fit",
                              [&] { return baselines::nb_fit(train_x, train_y, 2); });

        const Matrix eval_x = flatten_windows(ctx.eval);
        std::vector<double> probs(ctx.eval.size());
        std::vector<int> decisions(ctx.eval.size());
        for (int i = 0; i < eval_x.rows; ++i) {
          const auto post = baselines::nb_predict(
              nb, std::span<const double>(eval_x.row(i), static_cast<std::size_t>(eval_x.cols)));
          probs[i] = post[1];
          decisions[i] = post[1] >= 0.5 ? 1 : 0;
        }
        if (!final_round) {
          out.fold_binary.push_back(eval_binary(eval_truth, decisions));
        } else {
          out.test = eval_binary(eval_truth, decisions);
          if (auto roc = roc_or_none(probs, eval_truth)) {
            out.test_roc = *roc;
            out.test_auroc = roc->auc;
          }
        }
      }

      // --- logistic regression ---
      if (has_model("lr")) {
        auto& out = model_result("lr");
        const Matrix train_x = flatten_windows(ctx.train_bal);
        std::vector<int> train_y;
        for (const auto& w : ctx.train_bal) train_y.push_back(w.mortality_label);
        const auto lr = stage(round_name + " lr fit",
                              [&] { return baselines::lr_fit(train_x, train_y); });

        const Matrix eval_x = flatten_windows(ctx.eval);
        std::vector<double> probs(ctx.eval.size());
        std::vector<int> decisions(ctx.eval.size());
        for (int i = 0; i < eval_x.rows; ++i) {
          probs[i] = baselines::lr_predict(
              lr, std::span<const double>(eval_x.row(i), static_cast<std::size_t>(eval_x.cols)));
          decisions[i] = probs[i] >= 0.5 ? 1 : 0;
        }
        if (!final_round) {
          out.fold_binary.push_back(eval_binary(eval_truth, decisions));
        } else {
          out.test = eval_binary(eval_truth, decisions);
          if (auto roc = roc_or_none(probs, eval_truth)) {
            out.test_roc = *roc;
            out.test_auroc = roc->auc;
          }
        }
      }

      // --- severity scores, thresholded on the balanced training windows ---
      for (const char* score_name : {"saps2", "sofa"}) {
        if (!has_model(score_name)) continue;
        auto& out = model_result(score_name);
        const bool is_saps = std::string(score_name) == "saps2";

        auto score_of = [&](int stay) {
          const auto& entry = stays.cohort[stay];
          return stage(std::string(score_name) + " stay " + entry.stay_id, [&] {
            const auto breakdown =
                is_saps ? baselines::saps2_score(stays.raw[stay], entry.age_years)
                        : baselines::sofa_score(stays.raw[stay]);
            return static_cast<double>(breakdown.total);
          });
        };

        std::vector<double> train_scores;
        std::vector<int> train_y;
        for (const auto& w : ctx.train_bal) {
          train_scores.push_back(score_of(stay_index.at(w.grid.stay_id)));
          train_y.push_back(w.mortality_label);
        }
        const double threshold = stage(round_name + std::string(" ") + score_name + " threshold",
                                       [&] { return baselines::fit_threshold(train_scores, train_y); });

        std::vector<double> scores(ctx.eval_stays.size());
        std::vector<int> decisions(ctx.eval_stays.size());
        for (std::size_t i = 0; i < ctx.eval_stays.size(); ++i) {
          scores[i] = score_of(ctx.eval_stays[i]);
          decisions[i] = scores[i] >= threshold ? 1 : 0;
        }
        if (!final_round) {
          out.fold_binary.push_back(eval_binary(eval_truth, decisions));
        } else {
          out.test = eval_binary(eval_truth, decisions);
          if (auto roc = roc_or_none(scores, eval_truth)) {
            out.test_roc = *roc;
            out.test_auroc = roc->auc;
          }
        }
      }
    }

    for (auto& m : fr.models) {
      m.fold_mean = mean_of(m.fold_binary);
      if (m.model == "lstm") m.fold_multiclass_mean = multiclass_mean_of(m.fold_multiclass);
    }
    result.frames.push_back(std::move(fr));
  }
  return result;
}

}  // namespace icupred::experiment
