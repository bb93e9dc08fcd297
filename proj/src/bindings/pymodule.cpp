#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "icupred/baselines.hpp"
#include "icupred/data.hpp"
#include "icupred/experiment.hpp"
#include "icupred/metrics.hpp"
#include "icupred/nn.hpp"
#include "icupred/preprocess.hpp"
#include "icupred/prng.hpp"

namespace py = pybind11;
using namespace icupred;

namespace {

std::vector<std::vector<double>> matrix_rows(const Matrix& m) {
  std::vector<std::vector<double>> out(m.rows);
  for (int i = 0; i < m.rows; ++i) out[i].assign(m.row(i), m.row(i) + m.cols);
  return out;
}

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int i = 0; i < m.rows; ++i) {
    if (static_cast<int>(rows[i].size()) != m.cols)
      throw ValidationError("ragged matrix rows");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i));
  }
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-stage ICU mortality / length-of-stay prediction engine";
  m.attr("PRNG_ID") = kPrngId;
  m.attr("NUM_CHANNELS") = data::kNumChannels;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  // ---- data ----
  py::enum_<data::VitalChannel> channel(m, "VitalChannel");
  for (int c = 0; c < data::kNumChannels; ++c)
    channel.value(data::channel_name(static_cast<data::VitalChannel>(c)),
                  static_cast<data::VitalChannel>(c));

  py::class_<data::RawObservation>(m, "RawObservation")
      .def(py::init([](std::string stay_id, data::VitalChannel channel, int offset_minutes,
                       double value) {
             return data::RawObservation{std::move(stay_id), channel, offset_minutes, value};
           }),
           py::arg("stay_id"), py::arg("channel"), py::arg("offset_minutes"), py::arg("value"))
      .def_readwrite("stay_id", &data::RawObservation::stay_id)
      .def_readwrite("channel", &data::RawObservation::channel)
      .def_readwrite("offset_minutes", &data::RawObservation::offset_minutes)
      .def_readwrite("value", &data::RawObservation::value);

  py::class_<data::CohortEntry>(m, "CohortEntry")
      .def(py::init([](std::string stay_id, std::string patient_id, double age_years,
                       double los_hours, std::optional<double> death_time_hours) {
             return data::CohortEntry{std::move(stay_id), std::move(patient_id), age_years,
                                      los_hours, death_time_hours};
           }),
           py::arg("stay_id"), py::arg("patient_id"), py::arg("age_years"), py::arg("los_hours"),
           py::arg("death_time_hours") = std::nullopt)
      .def_readwrite("stay_id", &data::CohortEntry::stay_id)
      .def_readwrite("patient_id", &data::CohortEntry::patient_id)
      .def_readwrite("age_years", &data::CohortEntry::age_years)
      .def_readwrite("los_hours", &data::CohortEntry::los_hours)
      .def_readwrite("death_time_hours", &data::CohortEntry::death_time_hours);

  py::class_<data::SyntheticConfig>(m, "SyntheticConfig")
      .def(py::init([](int n_stays, double mortality_rate, double signal, double missing_rate,
                       std::uint64_t seed) {
             return data::SyntheticConfig{n_stays, mortality_rate, signal, missing_rate, seed};
           }),
           py::arg("n_stays"), py::arg("mortality_rate") = 0.3, py::arg("signal") = 3.0,
           py::arg("missing_rate") = 0.1, py::arg("seed") = 1)
      .def_readwrite("n_stays", &data::SyntheticConfig::n_stays)
      .def_readwrite("mortality_rate", &data::SyntheticConfig::mortality_rate)
      .def_readwrite("frame_signal_strength", &data::SyntheticConfig::frame_signal_strength)
      .def_readwrite("missing_rate", &data::SyntheticConfig::missing_rate)
      .def_readwrite("seed", &data::SyntheticConfig::seed);

  m.def("generate_synthetic_cohort", [](const data::SyntheticConfig& cfg) {
    auto generated = data::generate_synthetic_cohort(cfg);
    return py::make_tuple(std::move(generated.cohort), std::move(generated.observations));
  });
  m.def("parse_observations", [](const std::string& text) {
    std::istringstream in(text);
    return data::parse_observations(in);
  });
  m.def("parse_cohort", [](const std::string& text) {
    std::istringstream in(text);
    return data::parse_cohort(in);
  });
  m.def("serialize_observations", &data::serialize_observations);
  m.def("serialize_cohort", &data::serialize_cohort);

  // ---- preprocess ----
  py::class_<preprocess::ChannelGrid>(m, "ChannelGrid")
      .def_readonly("stay_id", &preprocess::ChannelGrid::stay_id)
      .def_readonly("frame_hours", &preprocess::ChannelGrid::frame_hours)
      .def_property_readonly("values",
                             [](const preprocess::ChannelGrid& g) { return matrix_rows(g.values); })
      .def("observed", &preprocess::ChannelGrid::observed)
      .def("fully_observed", &preprocess::ChannelGrid::fully_observed);

  py::class_<preprocess::ChannelStats>(m, "ChannelStats")
      .def(py::init<>())
      .def_property_readonly(
          "mean", [](const preprocess::ChannelStats& s) {
            return std::vector<double>(s.mean.begin(), s.mean.end());
          })
      .def_property_readonly("stddev", [](const preprocess::ChannelStats& s) {
        return std::vector<double>(s.stddev.begin(), s.stddev.end());
      });

  py::class_<preprocess::LabeledWindow>(m, "LabeledWindow")
      .def_readonly("grid", &preprocess::LabeledWindow::grid)
      .def_readonly("mortality_label", &preprocess::LabeledWindow::mortality_label)
      .def_readonly("los_class", &preprocess::LabeledWindow::los_class);

  m.def("apply_exclusions", &preprocess::apply_exclusions);
  m.def("resample_to_grid", &preprocess::resample_to_grid, py::arg("observations"),
        py::arg("frame_hours"));
  m.def("interpolate_linear", &preprocess::interpolate_linear);
  m.def("compute_channel_stats", &preprocess::compute_channel_stats);
  m.def("impute_mean", &preprocess::impute_mean);
  m.def("normalize_zscore", &preprocess::normalize_zscore);
  m.def("label_mortality", &preprocess::label_mortality);
  m.def("label_los", &preprocess::label_los);
  m.def(
      "make_labeled_window",
      [](const preprocess::ChannelGrid& grid, int mortality_label, std::optional<int> los_class) {
        return preprocess::LabeledWindow{grid, mortality_label, los_class};
      },
      py::arg("grid"), py::arg("mortality_label"), py::arg("los_class") = std::nullopt);
  m.def(
      "undersample_mortality",
      [](const std::vector<preprocess::LabeledWindow>& windows, std::uint64_t seed) {
        return preprocess::undersample(
            windows, [](const preprocess::LabeledWindow& w) { return w.mortality_label; }, seed);
      },
      py::arg("windows"), py::arg("seed"));
  m.def(
      "undersample_los",
      [](const std::vector<preprocess::LabeledWindow>& windows, std::uint64_t seed) {
        return preprocess::undersample(
            windows, [](const preprocess::LabeledWindow& w) { return *w.los_class; }, seed);
      },
      py::arg("windows"), py::arg("seed"));

  // ---- nn ----
  py::enum_<nn::Task>(m, "Task").value("binary", nn::Task::binary).value("multiclass4",
                                                                         nn::Task::multiclass4);

  py::class_<nn::ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("hidden_units", &nn::ModelConfig::hidden_units)
      .def_readwrite("dropout_rate", &nn::ModelConfig::dropout_rate)
      .def_readwrite("learning_rate", &nn::ModelConfig::learning_rate)
      .def_readwrite("epochs", &nn::ModelConfig::epochs)
      .def_readwrite("batch_size", &nn::ModelConfig::batch_size)
      .def_readwrite("folds", &nn::ModelConfig::folds)
      .def_readwrite("seed", &nn::ModelConfig::seed);

  py::class_<nn::TrainedModel>(m, "TrainedModel")
      .def_readonly("task", &nn::TrainedModel::task)
      .def_readonly("frame_hours", &nn::TrainedModel::frame_hours)
      .def_readonly("training_log", &nn::TrainedModel::training_log)
      .def_property_readonly("stats", [](const nn::TrainedModel& m_) { return m_.stats; });

  m.def("train", &nn::train, py::arg("windows"), py::arg("task"), py::arg("config"),
        py::arg("stats") = preprocess::ChannelStats{});
  m.def("predict", &nn::predict);
  m.def("decide_binary", &nn::decide_binary);
  m.def("decide_multiclass",
        [](const std::vector<double>& probs) { return nn::decide_multiclass(probs); });
  m.def("save_model", &nn::save_model);
  m.def("load_model", &nn::load_model);

  // ---- baselines ----
  py::class_<baselines::ScoreComponent>(m, "ScoreComponent")
      .def_readonly("name", &baselines::ScoreComponent::name)
      .def_readonly("points", &baselines::ScoreComponent::points)
      .def_readonly("assessed", &baselines::ScoreComponent::assessed);

  py::class_<baselines::ScoreBreakdown>(m, "ScoreBreakdown")
      .def_readonly("components", &baselines::ScoreBreakdown::components)
      .def_readonly("total", &baselines::ScoreBreakdown::total)
      .def_readonly("mortality_probability", &baselines::ScoreBreakdown::mortality_probability);

  m.def(
      "saps2_score",
      [](const preprocess::ChannelGrid& window, double age) {
        return baselines::saps2_score(window, age);
      },
      py::arg("raw_window"), py::arg("age_years"));
  m.def("sofa_score",
        [](const preprocess::ChannelGrid& window) { return baselines::sofa_score(window); });
  m.def(
      "fit_threshold",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        return baselines::fit_threshold(scores, labels);
      },
      py::arg("scores"), py::arg("labels"));

  // ---- metrics ----
  py::class_<metrics::RocCurve>(m, "RocCurve")
      .def_readonly("points", &metrics::RocCurve::points)
      .def_readonly("auc", &metrics::RocCurve::auc);

  m.def(
      "f1_mcc",
      [](const std::vector<int>& y_true, const std::vector<int>& y_pred) {
        const auto cm = metrics::confusion_matrix(y_true, y_pred, 2);
        const auto f1 = metrics::f1_binary(cm);
        const auto mcc = metrics::mcc_binary(cm);
        return py::make_tuple(f1.value, mcc.value);
      },
      py::arg("y_true"), py::arg("y_pred"));
  m.def(
      "roc_curve",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        return metrics::roc_curve(scores, labels);
      },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "auroc_multiclass",
      [](const std::vector<std::vector<double>>& probs, const std::vector<int>& labels) {
        const auto result = metrics::auroc_multiclass(matrix_from_rows(probs), labels);
        py::dict out;
        out["macro"] = result.macro;
        out["micro"] = result.micro;
        py::list per_class;
        for (int c = 0; c < 4; ++c)
          per_class.append(result.defined[c] ? py::object(py::float_(result.per_class[c]))
                                             : py::none());
        out["per_class"] = per_class;
        return out;
      },
      py::arg("probabilities"), py::arg("labels"));
  m.def("kfold_split", &metrics::kfold_split, py::arg("n"), py::arg("k"), py::arg("seed"));

  // ---- experiment ----
  m.def(
      "run_experiment_file",
      [](const std::string& config_path) {
        const auto cfg = experiment::parse_config_file(config_path);
        cfg.validate();
        const auto result = experiment::run_experiment(cfg);
        experiment::emit_report(result, cfg.out_dir);
        py::dict summary;
        for (const auto& frame : result.frames) {
          py::dict models;
          for (const auto& mr : frame.models) {
            py::dict entry;
            entry["test_f1"] = mr.test.f1.value;
            entry["test_mcc"] = mr.test.mcc.value;
            models[py::str(mr.model)] = entry;
          }
          summary[py::str(std::to_string(frame.frame_hours))] = models;
        }
        return summary;
      },
      py::arg("config_path"));
}
