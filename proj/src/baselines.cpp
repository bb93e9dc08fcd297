#include "icupred/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "icupred/error.hpp"

namespace icupred::baselines {

namespace detail {
const char* embedded_score_tables_text();
}

using data::kNumChannels;
using preprocess::ChannelGrid;

namespace {

double parse_bound(const std::string& token, std::size_t line_no) {
  if (token == "-inf") return -std::numeric_limits<double>::infinity();
  if (token == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used == token.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(line_no, "malformed bound '" + token + "'");
}

bool known_source(const std::string& source) {
  return source == "age" || data::channel_from_name(source).has_value();
}

ScoreComponentTable& table_for(std::vector<ScoreComponentTable>& tables,
                               const std::string& source) {
  for (auto& t : tables)
    if (t.source == source) return t;
  tables.push_back({source, {}});
  return tables.back();
}

}  // namespace

ScoreTables ScoreTables::parse(std::istream& in) {
  ScoreTables out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string kind;
    fields >> kind;
    if (kind == "version") {
      fields >> out.version;
      if (!fields) throw ParseError(line_no, "malformed version line");
    } else if (kind == "band") {
      std::string system, source, lo, hi;
      int points = 0;
      fields >> system >> source >> lo >> hi >> points;
      if (!fields) throw ParseError(line_no, "malformed band line");
      if (!known_source(source)) throw ParseError(line_no, "unknown source '" + source + "'");
      auto& tables = system == "saps2"   ? out.saps2
                     : system == "sofa"  ? out.sofa
                                         : throw ParseError(line_no, "unknown system '" + system + "'");
      table_for(tables, source)
          .bands.push_back({parse_bound(lo, line_no), parse_bound(hi, line_no), points});
    } else if (kind == "range") {
      std::string source, lo, hi;
      fields >> source >> lo >> hi;
      if (!fields) throw ParseError(line_no, "malformed range line");
      if (!known_source(source)) throw ParseError(line_no, "unknown source '" + source + "'");
      out.valid_range[source] = {parse_bound(lo, line_no), parse_bound(hi, line_no)};
    } else {
      throw ParseError(line_no, "unknown directive '" + kind + "'");
    }
  }
  if (out.version != 1) throw Error("unsupported score table version");
  return out;
}

ScoreTables ScoreTables::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open score tables '" + path + "'");
  return parse(in);
}

const ScoreTables& ScoreTables::builtin() {
  static const ScoreTables tables = [] {
    std::istringstream in(detail::embedded_score_tables_text());
    return parse(in);
  }();
  return tables;
}

namespace {

int band_points(const ScoreComponentTable& table, double value, std::size_t* matched) {
  for (std::size_t i = 0; i < table.bands.size(); ++i)
    if (value >= table.bands[i].lo && value < table.bands[i].hi) {
      if (matched) *matched = i;
      return table.bands[i].points;
    }
  throw Error("no scoring band covers value for '" + table.source + "'");
}

void check_range(const ScoreTables& tables, const std::string& source, double value) {
  const auto it = tables.valid_range.find(source);
  if (it == tables.valid_range.end()) return;
  if (value < it->second.first || value > it->second.second)
    throw ValidationError("'" + source + "' value " + std::to_string(value) +
                          " outside plausible range [" + std::to_string(it->second.first) + ", " +
                          std::to_string(it->second.second) + "]");
}

// Worst (most points) observed value of one channel over the window.
ScoreComponent score_channel(const ChannelGrid& window, const ScoreTables& tables,
                             const ScoreComponentTable& table) {
  ScoreComponent comp{table.source, 0, false};
  const auto channel = data::channel_from_name(table.source);
  const int c = static_cast<int>(*channel);
  for (int t = 0; t < window.frame_hours; ++t) {
    if (!window.observed(t, c)) continue;
    const double v = window.values.at(t, c);
    check_range(tables, table.source, v);
    comp.points = std::max(comp.points, band_points(table, v, nullptr));
    comp.assessed = true;
  }
  return comp;
}

const char* kSaps2NotAssessed[] = {"pao2_fio2", "urine_output", "sodium", "potassium",
                                   "bicarbonate", "admission_type", "chronic_disease"};
const char* kSofaNotAssessed[] = {"respiration", "coagulation", "renal"};

}  // namespace

ScoreBreakdown saps2_score(const ChannelGrid& raw_window, double age_years,
                           const ScoreTables& tables) {
  ScoreBreakdown out;
  for (const auto& table : tables.saps2) {
    ScoreComponent comp;
    if (table.source == "age") {
      check_range(tables, "age", age_years);
      comp = {"age", band_points(table, age_years, nullptr), true};
    } else {
      comp = score_channel(raw_window, tables, table);
    }
    out.total += comp.points;
    out.components.push_back(std::move(comp));
  }
  for (const char* name : kSaps2NotAssessed) out.components.push_back({name, 0, false});

  // Published SAPS-II logistic transform, applied to the partial total.
  const double s = static_cast<double>(out.total);
  const double logit = -7.7631 + 0.0737 * s + 0.9971 * std::log(s + 1.0);
  out.mortality_probability = 1.0 / (1.0 + std::exp(-logit));
  return out;
}

ScoreBreakdown sofa_score(const ChannelGrid& raw_window, const ScoreTables& tables) {
  ScoreBreakdown out;
  for (const auto& table : tables.sofa) {
    ScoreComponent comp = score_channel(raw_window, tables, table);
    out.total += comp.points;
    out.components.push_back(std::move(comp));
  }
  for (const char* name : kSofaNotAssessed) out.components.push_back({name, 0, false});
  return out;
}

NbModel nb_fit(const Matrix& features, std::span<const int> labels, int n_classes) {
  const int n = features.rows, d = features.cols;
  if (static_cast<std::size_t>(n) != labels.size())
    throw ValidationError("nb_fit: label count mismatch");
  std::vector<long long> counts(n_classes, 0);
  for (int y : labels) {
    if (y < 0 || y >= n_classes) throw ValidationError("nb_fit: label out of range");
    ++counts[y];
  }
  int present = 0;
  for (long long c : counts)
    if (c > 0) ++present;
  if (present < 2) throw ValidationError("nb_fit: training set has a single class");
  for (long long c : counts)
    if (c == 1) throw ValidationError("nb_fit: a class has fewer than 2 samples");

  NbModel model;
  model.n_classes = n_classes;
  model.priors.assign(n_classes, 0.0);
  model.mean = Matrix(n_classes, d);
  model.variance = Matrix(n_classes, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) model.mean.at(labels[i], j) += features.at(i, j);
  for (int c = 0; c < n_classes; ++c) {
    model.priors[c] = static_cast<double>(counts[c]) / n;
    if (counts[c] == 0) continue;
    for (int j = 0; j < d; ++j) model.mean.at(c, j) /= static_cast<double>(counts[c]);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) {
      const double diff = features.at(i, j) - model.mean.at(labels[i], j);
      model.variance.at(labels[i], j) += diff * diff;
    }
  for (int c = 0; c < n_classes; ++c)
    for (int j = 0; j < d; ++j) {
      if (counts[c] > 0) model.variance.at(c, j) /= static_cast<double>(counts[c]);
      model.variance.at(c, j) = std::max(model.variance.at(c, j), kNbVarianceFloor);
    }
  return model;
}

std::vector<double> nb_predict(const NbModel& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.mean.cols)
    throw ValidationError("nb_predict: feature size mismatch");
  std::vector<double> log_post(model.n_classes, -std::numeric_limits<double>::infinity());
  for (int c = 0; c < model.n_classes; ++c) {
    if (model.priors[c] == 0.0) continue;
    double lp = std::log(model.priors[c]);
    for (int j = 0; j < model.mean.cols; ++j) {
      const double var = model.variance.at(c, j);
      const double diff = x[j] - model.mean.at(c, j);
      lp += -0.5 * std::log(2.0 * std::numbers::pi * var) - diff * diff / (2.0 * var);
    }
    log_post[c] = lp;
  }
  const double mx = *std::max_element(log_post.begin(), log_post.end());
  double sum = 0.0;
  std::vector<double> post(model.n_classes);
  for (int c = 0; c < model.n_classes; ++c) {
    post[c] = std::exp(log_post[c] - mx);
    sum += post[c];
  }
  for (double& p : post) p /= sum;
  return post;
}

LrModel lr_fit(const Matrix& features, std::span<const int> labels, double learning_rate,
               int iterations) {
  const int n = features.rows, d = features.cols;
  if (n == 0) throw ValidationError("lr_fit: empty training set");
  if (static_cast<std::size_t>(n) != labels.size())
    throw ValidationError("lr_fit: label count mismatch");

  LrModel model;
  model.weights.assign(d, 0.0);

  std::vector<double> p(n);
  std::vector<double> grad(d);
  double prev_loss = std::numeric_limits<double>::infinity();
  for (int it = 0; it < iterations; ++it) {
    double loss = 0.0;
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (int i = 0; i < n; ++i) {
      const double* row = features.row(i);
      double z = model.intercept;
      for (int j = 0; j < d; ++j) z += model.weights[j] * row[j];
      p[i] = 1.0 / (1.0 + std::exp(-z));
      const double clipped = std::clamp(labels[i] == 1 ? p[i] : 1.0 - p[i], 1e-12, 1.0);
      loss -= std::log(clipped);
      const double err = (p[i] - labels[i]) / n;
      for (int j = 0; j < d; ++j) grad[j] += err * row[j];
      grad_b += err;
    }
    loss /= n;
    if (!std::isfinite(loss)) throw Error("lr_fit: diverged (non-finite loss)");
    if (loss > prev_loss + 1e-12)
      throw Error("lr_fit: loss increased at iteration " + std::to_string(it) +
                  " (step size too large for this data)");
    prev_loss = loss;
    for (int j = 0; j < d; ++j) model.weights[j] -= learning_rate * grad[j];
    model.intercept -= learning_rate * grad_b;
  }
  return model;
}

double lr_predict(const LrModel& model, std::span<const double> x) {
  if (x.size() != model.weights.size())
    throw ValidationError("lr_predict: feature size mismatch");
  double z = model.intercept;
  for (std::size_t j = 0; j < x.size(); ++j) z += model.weights[j] * x[j];
  return 1.0 / (1.0 + std::exp(-z));
}

double fit_threshold(std::span<const double> scores, std::span<const int> labels) {
  if (scores.empty() || scores.size() != labels.size())
    throw ValidationError("fit_threshold: bad input sizes");
  std::vector<double> distinct(scores.begin(), scores.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() == 1) return distinct.front();

  auto f1_at = [&](double threshold) {
    long long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const bool pred = scores[i] >= threshold;
      if (pred && labels[i] == 1) ++tp;
      else if (pred && labels[i] == 0) ++fp;
      else if (!pred && labels[i] == 1) ++fn;
    }
    if (tp == 0) return 0.0;
    const double precision = static_cast<double>(tp) / (tp + fp);
    const double recall = static_cast<double>(tp) / (tp + fn);
    return 2.0 * precision * recall / (precision + recall);
  };

  double best_threshold = 0.0, best_f1 = -1.0;
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    const double candidate = (distinct[i] + distinct[i + 1]) / 2.0;
    const double f1 = f1_at(candidate);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_threshold = candidate;
    }
  }
  return best_threshold;
}

}  // namespace icupred::baselines
