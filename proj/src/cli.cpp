#include "icupred/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "icupred/baselines.hpp"
#include "icupred/data.hpp"
#include "icupred/experiment.hpp"
#include "icupred/nn.hpp"
#include "icupred/preprocess.hpp"
#include "icupred/prng.hpp"

namespace icupred::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

int run_synth(const data::SyntheticConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const auto generated = data::generate_synthetic_cohort(cfg);

  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create '" + out_dir + "': " + ec.message());

  write_text(dir / "cohort.csv", data::serialize_cohort(generated.cohort));
  write_text(dir / "observations.csv", data::serialize_observations(generated.observations));

  json provenance;
  provenance["schema"] = "icupred-synthetic-v1";
  provenance["prng"] = kPrngId;
  provenance["n_stays"] = cfg.n_stays;
  provenance["mortality_rate"] = cfg.mortality_rate;
  provenance["frame_signal_strength"] = cfg.frame_signal_strength;
  provenance["missing_rate"] = cfg.missing_rate;
  provenance["seed"] = cfg.seed;
  write_text(dir / "synthetic_config.json", provenance.dump(2) + "\n");

  std::cout << "wrote " << generated.cohort.size() << " stays, " << generated.observations.size()
            << " observations to " << out_dir << "\n";
  return 0;
}

int run_experiment_cmd(const std::string& config_path, const std::vector<int>& frame_override,
                       const std::string& out_override, std::optional<std::uint64_t> seed_override) {
  experiment::ExperimentConfig cfg = experiment::parse_config_file(config_path);
  if (!frame_override.empty()) cfg.frames = frame_override;
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (seed_override) {
    cfg.seed = *seed_override;
    cfg.model.seed = *seed_override;
  }
  cfg.validate();

  const auto result = experiment::run_experiment(cfg);
  experiment::emit_report(result, cfg.out_dir);

  for (const auto& fr : result.frames)
    for (const auto& m : fr.models)
      std::cout << "frame " << fr.frame_hours << "h  " << m.model << "  test F1 "
                << m.test.f1.value << "  MCC " << m.test.mcc.value << "\n";
  std::cout << "report written to " << cfg.out_dir << "\n";
  return 0;
}

json breakdown_json(const baselines::ScoreBreakdown& breakdown) {
  json components = json::array();
  for (const auto& c : breakdown.components)
    components.push_back({{"name", c.name}, {"points", c.points}, {"assessed", c.assessed}});
  json out;
  out["total"] = breakdown.total;
  if (breakdown.mortality_probability)
    out["mortality_probability"] = *breakdown.mortality_probability;
  out["components"] = std::move(components);
  return out;
}

int run_score(const std::string& obs_path, std::string stay_id, double age, int frame,
              const std::string& tables_path) {
  std::ifstream in(obs_path);
  if (!in) throw Error("cannot open observations file '" + obs_path + "'");
  const auto observations = data::parse_observations(in);

  std::vector<data::RawObservation> selected;
  std::set<std::string> ids;
  for (const auto& obs : observations) ids.insert(obs.stay_id);
  if (stay_id.empty()) {
    if (ids.size() != 1)
      throw ValidationError("observations contain " + std::to_string(ids.size()) +
                            " stays; pass --stay");
    stay_id = *ids.begin();
  } else if (!ids.contains(stay_id)) {
    throw Error("stay '" + stay_id + "' not present in " + obs_path);
  }
  for (const auto& obs : observations)
    if (obs.stay_id == stay_id) selected.push_back(obs);

  const auto grid = preprocess::resample_to_grid(selected, frame);
  const baselines::ScoreTables tables =
      tables_path.empty() ? baselines::ScoreTables::builtin()
                          : baselines::ScoreTables::load_file(tables_path);

  json out;
  out["stay_id"] = stay_id;
  out["frame_hours"] = frame;
  out["age_years"] = age;
  out["saps2"] = breakdown_json(baselines::saps2_score(grid, age, tables));
  out["sofa"] = breakdown_json(baselines::sofa_score(grid, tables));
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_predict(const std::string& model_dir, int frame, const std::string& obs_path,
                const std::string& out_path) {
  const fs::path dir(model_dir);
  const auto binary_path = dir / ("model_lstm_binary_" + std::to_string(frame) + ".bin");
  const auto los_path = dir / ("model_lstm_los_" + std::to_string(frame) + ".bin");
  const auto stage1 = nn::load_model(binary_path.string());
  const auto stage2 = nn::load_model(los_path.string());

  std::ifstream in(obs_path);
  if (!in) throw Error("cannot open observations file '" + obs_path + "'");
  const auto observations = data::parse_observations(in);

  std::vector<std::string> stay_order;
  std::set<std::string> seen;
  for (const auto& obs : observations)
    if (seen.insert(obs.stay_id).second) stay_order.push_back(obs.stay_id);

  std::string csv = "stay_id,mortality_probability,mortality_decision,los_class\n";
  for (const auto& stay : stay_order) {
    std::vector<data::RawObservation> selected;
    for (const auto& obs : observations)
      if (obs.stay_id == stay) selected.push_back(obs);
    auto grid = preprocess::resample_to_grid(selected, frame);
    grid = preprocess::interpolate_linear(grid);
    grid = preprocess::impute_mean(grid, stage1.stats);
    grid = preprocess::normalize_zscore(grid, stage1.stats);

    const double p = nn::predict(stage1, grid)[0];
    const int decision = nn::decide_binary(p);
    csv += stay + "," + format_double(p) + "," + std::to_string(decision) + ",";
    if (decision == 1) {
      const auto probs = nn::predict(stage2, grid);
      csv += std::to_string(nn::decide_multiclass(probs));
    }
    csv += '\n';
  }
  if (out_path.empty())
    std::cout << csv;
  else
    write_text(out_path, csv);
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Two-stage ICU mortality and length-of-stay prediction engine"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort");
  data::SyntheticConfig syn_cfg;
  syn_cfg.n_stays = 0;
  syn_cfg.mortality_rate = 0.3;
  syn_cfg.frame_signal_strength = 3.0;
  syn_cfg.missing_rate = 0.1;
  syn_cfg.seed = 1;
  std::string synth_out;
  synth->add_option("--n", syn_cfg.n_stays, "Number of stays")->required();
  synth->add_option("--mortality", syn_cfg.mortality_rate, "Non-survivor fraction");
  synth->add_option("--signal", syn_cfg.frame_signal_strength,
                    "Deterioration drift, in baseline sd per 6 h");
  synth->add_option("--missing", syn_cfg.missing_rate, "Observation drop probability");
  synth->add_option("--seed", syn_cfg.seed, "Generator seed");
  synth->add_option("--out", synth_out, "Output directory")->required();

  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  std::string run_config, run_out;
  std::vector<int> run_frames;
  std::optional<std::uint64_t> run_seed;
  run->add_option("--config", run_config, "key = value config file")->required();
  run->add_option("--frame", run_frames, "Override frame_hours (repeatable)");
  run->add_option("--out", run_out, "Override out_dir");
  run->add_option("--seed", run_seed, "Override seed");

  auto* score = app.add_subcommand("score", "SAPS-II and SOFA for a single stay");
  std::string score_obs, score_stay, score_tables;
  double score_age = 0.0;
  int score_frame = 24;
  score->add_option("--observations", score_obs, "Observations CSV")->required();
  score->add_option("--stay", score_stay, "Stay id (optional for single-stay files)");
  score->add_option("--age", score_age, "Age in years")->required();
  score->add_option("--frame", score_frame, "Window length in hours");
  score->add_option("--tables", score_tables, "Score table file (default: built-in)");

  auto* predict = app.add_subcommand("predict", "Two-stage predictions from saved models");
  std::string predict_dir, predict_obs, predict_out;
  int predict_frame = 0;
  predict->add_option("--model-dir", predict_dir, "Directory with model_lstm_*.bin")->required();
  predict->add_option("--frame", predict_frame, "Frame the models were trained at")->required();
  predict->add_option("--observations", predict_obs, "Observations CSV")->required();
  predict->add_option("--out", predict_out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth) return run_synth(syn_cfg, synth_out);
    if (*run) return run_experiment_cmd(run_config, run_frames, run_out, run_seed);
    if (*score) {
      if (!preprocess::valid_frame_hours(score_frame))
        throw ValidationError("--frame must be one of 6, 12, 24");
      return run_score(score_obs, score_stay, score_age, score_frame, score_tables);
    }
    if (*predict) {
      if (!preprocess::valid_frame_hours(predict_frame))
        throw ValidationError("--frame must be one of 6, 12, 24");
      return run_predict(predict_dir, predict_frame, predict_obs, predict_out);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace icupred::cli
