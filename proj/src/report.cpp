#include <charconv>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "icupred/experiment.hpp"
#include "icupred/prng.hpp"

namespace icupred::experiment {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

json metric_json(const metrics::MetricValue& m) {
  return json{{"value", m.value}, {"degenerate", m.degenerate}};
}

json binary_json(const BinaryEval& e) {
  return json{{"f1", metric_json(e.f1)}, {"mcc", metric_json(e.mcc)}};
}

json multiclass_json(const std::optional<MulticlassEval>& e) {
  if (!e) return nullptr;
  json per_class = json::array();
  for (int c = 0; c < 4; ++c)
    per_class.push_back(e->auroc.defined[c] ? json(e->auroc.per_class[c]) : json(nullptr));
  return json{{"micro_auroc", e->auroc.micro},
              {"macro_auroc", e->auroc.macro},
              {"per_class_auroc", per_class},
              {"macro_skipped_class", e->auroc.macro_skipped_class}};
}

json counts_json(const TrainCounts& counts) {
  json out;
  out["stage1"] = counts.stage1;
  out["stage2"] = counts.stage2.empty() ? json(nullptr) : json(counts.stage2);
  return out;
}

json config_json(const ExperimentConfig& cfg) {
  json out;
  if (cfg.synthetic) {
    out["input"] = "synthetic";
    out["synthetic"] = {{"n", cfg.synthetic->n_stays},
                        {"mortality_rate", cfg.synthetic->mortality_rate},
                        {"signal", cfg.synthetic->frame_signal_strength},
                        {"missing_rate", cfg.synthetic->missing_rate}};
  } else {
    out["input"] = "files";
    out["cohort_path"] = cfg.cohort_path;
    out["observations_path"] = cfg.observations_path;
  }
  out["frame_hours"] = cfg.frames;
  out["hidden_units"] = cfg.model.hidden_units;
  out["dropout_rate"] = cfg.model.dropout_rate;
  out["learning_rate"] = cfg.model.learning_rate;
  out["epochs"] = cfg.model.epochs;
  out["batch_size"] = cfg.model.batch_size;
  out["folds"] = cfg.model.folds;
  out["test_fraction"] = cfg.test_fraction;
  out["seed"] = cfg.seed;
  out["models"] = cfg.models;
  out["out_dir"] = cfg.out_dir;
  return out;
}

std::string roc_csv(const metrics::RocCurve& curve) {
  std::string out = "fpr,tpr\n";
  for (const auto& [fpr, tpr] : curve.points) {
    out += format_double(fpr);
    out += ',';
    out += format_double(tpr);
    out += '\n';
  }
  return out;
}

std::string predictions_csv(const std::vector<StagePrediction>& predictions) {
  std::string out = "stay_id,mortality_probability,mortality_decision,los_class\n";
  for (const auto& p : predictions) {
    out += p.stay_id;
    out += ',';
    out += format_double(p.mortality_probability);
    out += ',';
    out += std::to_string(p.mortality_decision);
    out += ',';
    if (p.los_class) out += std::to_string(*p.los_class);
    out += '\n';
  }
  return out;
}

// Minimal standalone plot: axes, chance diagonal, one path per curve.
std::string multiclass_svg(const MulticlassCurves& curves, int frame_hours,
                           const std::optional<MulticlassEval>& eval) {
  constexpr double kW = 560, kH = 440, kLeft = 60, kTop = 30, kPlotW = 400, kPlotH = 340;
  const auto px = [&](double fpr) { return kLeft + fpr * kPlotW; };
  const auto py = [&](double tpr) { return kTop + (1.0 - tpr) * kPlotH; };

  const char* class_colors[4] = {"#d62728", "#ff7f0e", "#2ca02c", "#1f77b4"};

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(kW) +
         "\" height=\"" + format_double(kH) + "\" viewBox=\"0 0 " + format_double(kW) + " " +
         format_double(kH) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + format_double(kW) + "\" height=\"" +
         format_double(kH) + "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + format_double(kLeft) + "\" y=\"18\" font-family=\"sans-serif\" "
         "font-size=\"14\">Multiclass ROC, " + std::to_string(frame_hours) + "-hour frame</text>\n";

  // axes and chance line
  svg += "<line x1=\"" + format_double(px(0)) + "\" y1=\"" + format_double(py(0)) + "\" x2=\"" +
         format_double(px(1)) + "\" y2=\"" + format_double(py(0)) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_double(px(0)) + "\" y1=\"" + format_double(py(0)) + "\" x2=\"" +
         format_double(px(0)) + "\" y2=\"" + format_double(py(1)) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_double(px(0)) + "\" y1=\"" + format_double(py(0)) + "\" x2=\"" +
         format_double(px(1)) + "\" y2=\"" + format_double(py(1)) +
         "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double v = k / 5.0;
    svg += "<text x=\"" + format_double(px(v) - 8) + "\" y=\"" + format_double(py(0) + 16) +
           "\" font-family=\"sans-serif\" font-size=\"10\">" + format_double(v) + "</text>\n";
    svg += "<text x=\"" + format_double(px(0) - 28) + "\" y=\"" + format_double(py(v) + 4) +
           "\" font-family=\"sans-serif\" font-size=\"10\">" + format_double(v) + "</text>\n";
  }
  svg += "<text x=\"" + format_double(px(0.5) - 50) + "\" y=\"" + format_double(py(0) + 34) +
         "\" font-family=\"sans-serif\" font-size=\"12\">False positive rate</text>\n";

  const auto path_for = [&](const std::vector<std::pair<double, double>>& pts,
                            const std::string& color, const std::string& dash) {
    std::string d;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d += i == 0 ? "M" : " L";
      d += format_double(px(pts[i].first)) + " " + format_double(py(pts[i].second));
    }
    return "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"" +
           (dash.empty() ? "" : " stroke-dasharray=\"" + dash + "\"") + "/>\n";
  };

  double legend_y = kTop + 16;
  const auto legend = [&](const std::string& color, const std::string& label) {
    svg += "<rect x=\"" + format_double(kLeft + kPlotW + 14) + "\" y=\"" +
           format_double(legend_y - 8) + "\" width=\"10\" height=\"10\" fill=\"" + color +
           "\"/>\n";
    svg += "<text x=\"" + format_double(kLeft + kPlotW + 28) + "\" y=\"" +
           format_double(legend_y + 1) + "\" font-family=\"sans-serif\" font-size=\"10\">" +
           label + "</text>\n";
    legend_y += 16;
  };

  for (int c = 0; c < 4; ++c) {
    if (!curves.defined[c]) continue;
    svg += path_for(curves.per_class[c].points, class_colors[c], "");
    std::string label = "class " + std::to_string(c);
    if (eval && eval->auroc.defined[c])
      label += " (AUC " + format_double(eval->auroc.per_class[c]) + ")";
    legend(class_colors[c], label);
  }
  svg += path_for(curves.micro.points, "#9467bd", "6 2");
  legend("#9467bd", eval ? "micro (AUC " + format_double(eval->auroc.micro) + ")" : "micro");
  svg += path_for(curves.macro, "#8c564b", "2 2");
  legend("#8c564b", eval ? "macro (AUC " + format_double(eval->auroc.macro) + ")" : "macro");

  svg += "</svg>\n";
  return svg;
}

}  // namespace

void emit_report(const RunResult& result, const std::string& out_dir) {
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + out_dir + "': " + ec.message());

  json report;
  report["schema"] = "icupred-report-v1";
  report["prng"] = kPrngId;
  report["gradient_clip_norm"] = nn::kGradClipNorm;
  report["notes"] = "all models consume the same preprocessed windows "
                    "(flattened for nb/lr, raw units for the severity scores)";
  report["config"] = config_json(result.config);
  report["partition"] = {{"n_stays_after_exclusions", result.n_stays},
                         {"n_test", result.n_test},
                         {"fold_sizes", result.fold_sizes}};

  json frames = json::array();
  for (const auto& fr : result.frames) {
    json frame;
    frame["frame_hours"] = fr.frame_hours;

    json rounds = json::array();
    for (std::size_t f = 0; f < fr.fold_counts.size(); ++f) {
      json r;
      r["fold"] = static_cast<int>(f);
      r.update(counts_json(fr.fold_counts[f]));
      rounds.push_back(std::move(r));
    }
    frame["fold_train_counts"] = std::move(rounds);
    frame["final_train_counts"] = counts_json(fr.final_counts);

    json models = json::array();
    for (const auto& m : fr.models) {
      json mj;
      mj["model"] = m.model;
      json fold_binary = json::array();
      for (const auto& e : m.fold_binary) fold_binary.push_back(binary_json(e));
      mj["binary"] = {{"folds", std::move(fold_binary)},
                      {"fold_mean", binary_json(m.fold_mean)},
                      {"test", binary_json(m.test)}};
      mj["binary"]["test_auroc"] = m.test_auroc ? json(*m.test_auroc) : json(nullptr);
      if (m.model == "lstm") {
        json fold_mc = json::array();
        for (const auto& e : m.fold_multiclass) fold_mc.push_back(multiclass_json(e));
        mj["multiclass"] = {{"folds", std::move(fold_mc)},
                            {"fold_mean", multiclass_json(m.fold_multiclass_mean)},
                            {"test", multiclass_json(m.test_multiclass)}};
      }
      models.push_back(std::move(mj));
    }
    frame["models"] = std::move(models);
    frames.push_back(std::move(frame));
  }
  report["frames"] = std::move(frames);

  write_file(dir / "report.json", report.dump(2) + "\n");

  std::string manifest = "stay_id,role\n";
  for (const auto& [stay_id, role] : result.fold_manifest) manifest += stay_id + "," + role + "\n";
  write_file(dir / "folds_manifest.csv", manifest);

  for (const auto& fr : result.frames) {
    const std::string suffix = std::to_string(fr.frame_hours);
    for (const auto& m : fr.models)
      if (!m.test_roc.points.empty())
        write_file(dir / ("roc_" + m.model + "_" + suffix + ".csv"), roc_csv(m.test_roc));

    if (fr.lstm_binary) {
      write_file(dir / ("predictions_" + suffix + ".csv"), predictions_csv(fr.predictions));
      nn::save_model(*fr.lstm_binary, (dir / ("model_lstm_binary_" + suffix + ".bin")).string());
      if (fr.lstm_los)
        nn::save_model(*fr.lstm_los, (dir / ("model_lstm_los_" + suffix + ".bin")).string());
    }
    if (fr.multiclass_curves) {
      const ModelFrameResult* lstm = nullptr;
      for (const auto& m : fr.models)
        if (m.model == "lstm") lstm = &m;
      write_file(dir / ("roc_multiclass_" + suffix + ".svg"),
                 multiclass_svg(*fr.multiclass_curves, fr.frame_hours,
                                lstm ? lstm->test_multiclass : std::nullopt));
    }
  }
}

}  // namespace icupred::experiment
