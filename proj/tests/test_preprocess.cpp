#include <doctest.h>

#include <cmath>
#include <set>

#include "icupred/preprocess.hpp"
#include "icupred/prng.hpp"

using namespace icupred;
using namespace icupred::preprocess;
using data::CohortEntry;
using data::kNumChannels;
using data::RawObservation;
using data::VitalChannel;

namespace {

CohortEntry entry(double age, double los, std::optional<double> death = std::nullopt) {
  CohortEntry e;
  e.stay_id = "s";
  e.patient_id = "p";
  e.age_years = age;
  e.los_hours = los;
  e.death_time_hours = death;
  return e;
}

ChannelGrid empty_grid(int frame) {
  ChannelGrid g;
  g.stay_id = "s";
  g.frame_hours = frame;
  g.values = Matrix(frame, kNumChannels);
  g.mask.assign(static_cast<std::size_t>(frame) * kNumChannels, 0);
  return g;
}

ChannelGrid full_grid(int frame, double fill) {
  ChannelGrid g = empty_grid(frame);
  for (int t = 0; t < frame; ++t)
    for (int c = 0; c < kNumChannels; ++c) {
      g.values.at(t, c) = fill;
      g.set_observed(t, c, true);
    }
  return g;
}

}  // namespace

TEST_CASE("exclusion boundaries follow the stated criteria exactly") {
  auto keep = [](const CohortEntry& e) { return apply_exclusions({e}).size() == 1; };
  CHECK(keep(entry(16, 1.5)));
  CHECK(keep(entry(89, 48)));
  CHECK(keep(entry(45, 1.0)));
  CHECK_FALSE(keep(entry(15, 48)));
  CHECK_FALSE(keep(entry(90, 48)));
  CHECK_FALSE(keep(entry(45, 0.5)));
  CHECK_FALSE(keep(entry(45, 0.99)));
}

TEST_CASE("apply_exclusions is idempotent and order preserving") {
  std::vector<CohortEntry> cohort = {entry(20, 5), entry(90, 5), entry(30, 0.2), entry(70, 9)};
  cohort[0].stay_id = "a";
  cohort[1].stay_id = "b";
  cohort[2].stay_id = "c";
  cohort[3].stay_id = "d";
  const auto once = apply_exclusions(cohort);
  REQUIRE(once.size() == 2);
  CHECK(once[0].stay_id == "a");
  CHECK(once[1].stay_id == "d");
  CHECK(apply_exclusions(once) == once);
}

TEST_CASE("resampling averages within hourly bins") {
  std::vector<RawObservation> obs = {
      {"s", VitalChannel::heart_rate, 10, 70.0},
      {"s", VitalChannel::heart_rate, 50, 74.0},
  };
  const auto grid = resample_to_grid(obs, 6);
  CHECK(grid.frame_hours == 6);
  CHECK(grid.values.rows == 6);
  CHECK(grid.observed(0, 0));
  CHECK(grid.values.at(0, 0) == 72.0);
  // untouched channel stays fully missing
  for (int t = 0; t < 6; ++t) CHECK_FALSE(grid.observed(t, static_cast<int>(VitalChannel::bilirubin)));
}

TEST_CASE("resampling bins right edges upward and drops beyond-frame rows") {
  std::vector<RawObservation> obs = {
      {"s", VitalChannel::heart_rate, 60, 100.0},   // exactly on the edge -> hour 1
      {"s", VitalChannel::heart_rate, 359, 50.0},   // last in-frame minute
      {"s", VitalChannel::heart_rate, 360, 999.0},  // beyond the 6-hour frame
  };
  const auto grid = resample_to_grid(obs, 6);
  CHECK_FALSE(grid.observed(0, 0));
  CHECK(grid.values.at(1, 0) == 100.0);
  CHECK(grid.values.at(5, 0) == 50.0);
}

TEST_CASE("resampling rejects mixed stays and bad frames") {
  std::vector<RawObservation> obs = {
      {"s1", VitalChannel::heart_rate, 0, 70.0},
      {"s2", VitalChannel::heart_rate, 0, 70.0},
  };
  CHECK_THROWS_AS(resample_to_grid(obs, 6), ValidationError);
  CHECK_THROWS_AS(resample_to_grid({}, 7), ValidationError);
}

TEST_CASE("linear interpolation fills interior gaps only") {
  ChannelGrid g = empty_grid(6);
  const int hr = 0;
  g.values.at(1, hr) = 1.0;
  g.set_observed(1, hr, true);
  g.values.at(3, hr) = 3.0;
  g.set_observed(3, hr, true);

  const auto filled = interpolate_linear(g);
  CHECK(filled.values.at(2, hr) == 2.0);
  CHECK(filled.observed(2, hr));
  CHECK_FALSE(filled.observed(0, hr));  // no left anchor
  CHECK_FALSE(filled.observed(4, hr));  // no right anchor
  CHECK_FALSE(filled.observed(5, hr));
  CHECK(filled.values.at(1, hr) == 1.0);
  CHECK(filled.values.at(3, hr) == 3.0);

  // idempotent, and identity on complete columns
  CHECK(interpolate_linear(filled) == filled);
  const auto complete = full_grid(6, 2.5);
  CHECK(interpolate_linear(complete) == complete);
}

TEST_CASE("channel stats use observed cells only, population sd") {
  ChannelGrid g = empty_grid(6);
  g.values.at(0, 0) = 70.0;
  g.set_observed(0, 0, true);
  g.values.at(1, 0) = 80.0;
  g.set_observed(1, 0, true);
  ChannelGrid other = full_grid(6, 5.0);

  const auto stats = compute_channel_stats({g, other});
  CHECK(stats.mean[0] == doctest::Approx((70 + 80 + 6 * 5) / 8.0));

  const auto isolated = compute_channel_stats({g, [] {
                                                 ChannelGrid f = full_grid(6, 1.0);
                                                 // hide channel 0 so only g contributes there
                                                 for (int t = 0; t < 6; ++t) f.set_observed(t, 0, false);
                                                 return f;
                                               }()});
  CHECK(isolated.mean[0] == 75.0);
  CHECK(isolated.stddev[0] == 5.0);
  CHECK(isolated.stddev[1] == 0.0);  // identical values everywhere
}

TEST_CASE("channel stats report a fully missing channel") {
  ChannelGrid g = full_grid(6, 1.0);
  for (int t = 0; t < 6; ++t) g.set_observed(t, 10, false);
  CHECK_THROWS_WITH_AS(compute_channel_stats({g}),
                       "channel 'bilirubin' has no observed cells in the training data", Error);
}

TEST_CASE("mean imputation completes the grid") {
  ChannelStats stats;
  for (int c = 0; c < kNumChannels; ++c) stats.mean[c] = 10.0 + c;

  ChannelGrid g = empty_grid(6);
  g.values.at(3, 0) = 99.0;
  g.set_observed(3, 0, true);

  const auto imputed = impute_mean(g, stats);
  CHECK(imputed.fully_observed());
  CHECK(imputed.values.at(0, 0) == 10.0);
  CHECK(imputed.values.at(3, 0) == 99.0);
  CHECK(imputed.values.at(5, 10) == 20.0);
  for (const double v : imputed.values.data) CHECK(std::isfinite(v));

  const auto complete = full_grid(6, 3.0);
  CHECK(impute_mean(complete, stats) == complete);
}

TEST_CASE("z-normalization centers, scales, and guards sd zero") {
  ChannelStats stats;
  for (int c = 0; c < kNumChannels; ++c) {
    stats.mean[c] = 100.0;
    stats.stddev[c] = c == 0 ? 0.0 : 10.0;
  }
  const auto grid = full_grid(4, 100.0);
  const auto normalized = normalize_zscore(grid, stats);
  for (int t = 0; t < 4; ++t)
    for (int c = 0; c < kNumChannels; ++c) CHECK(normalized.values.at(t, c) == 0.0);

  ChannelStats identity;
  for (int c = 0; c < kNumChannels; ++c) {
    identity.mean[c] = 0.0;
    identity.stddev[c] = 1.0;
  }
  auto varied = full_grid(4, 0.0);
  varied.values.at(2, 3) = -7.25;
  CHECK(normalize_zscore(varied, identity) == varied);
}

TEST_CASE("normalizing with stats from imputed data yields mean 0 sd 1") {
  RngStream rng(11);
  std::vector<ChannelGrid> grids;
  for (int i = 0; i < 8; ++i) {
    ChannelGrid g = empty_grid(6);
    for (int t = 0; t < 6; ++t)
      for (int c = 0; c < kNumChannels; ++c)
        if (rng.bernoulli(0.8)) {
          g.values.at(t, c) = rng.normal(50.0 + c, 3.0 + c);
          g.set_observed(t, c, true);
        }
    grids.push_back(interpolate_linear(g));
  }
  const auto pre_stats = compute_channel_stats(grids);
  std::vector<ChannelGrid> imputed;
  for (const auto& g : grids) imputed.push_back(impute_mean(g, pre_stats));

  const auto stats = compute_channel_stats(imputed);  // all cells observed now
  std::array<double, kNumChannels> sum{}, sum_sq{};
  int count = 0;
  for (const auto& g : imputed) {
    const auto normalized = normalize_zscore(g, stats);
    for (int t = 0; t < 6; ++t)
      for (int c = 0; c < kNumChannels; ++c) {
        sum[c] += normalized.values.at(t, c);
        sum_sq[c] += normalized.values.at(t, c) * normalized.values.at(t, c);
      }
    count += 6;
  }
  for (int c = 0; c < kNumChannels; ++c) {
    const double mean = sum[c] / count;
    const double sd = std::sqrt(std::max(0.0, sum_sq[c] / count - mean * mean));
    CHECK(std::abs(mean) < 1e-9);
    if (stats.stddev[c] > 0.0) CHECK(std::abs(sd - 1.0) < 1e-9);
  }
}

TEST_CASE("mortality label is presence of a death time") {
  CHECK(label_mortality(entry(50, 10)) == 0);
  CHECK(label_mortality(entry(50, 40, 30.0)) == 1);
  CHECK(label_mortality(entry(50, 40, 0.5)) == 1);
}

TEST_CASE("LOS classes partition on the stated boundaries") {
  CHECK(label_los(entry(50, 40, 5.9)) == 0);
  CHECK(label_los(entry(50, 40, 6.0)) == 1);
  CHECK(label_los(entry(50, 40, 11.999)) == 1);
  CHECK(label_los(entry(50, 40, 12.0)) == 2);
  CHECK(label_los(entry(50, 40, 23.999)) == 2);
  CHECK(label_los(entry(50, 40, 24.0)) == 3);
  CHECK(label_los(entry(50, 40, 500.0)) == 3);
  CHECK_THROWS_AS(label_los(entry(50, 40)), ValidationError);
  CHECK_THROWS_AS(label_los(entry(50, 40, 0.0)), ValidationError);

  RngStream rng(4);
  for (int i = 0; i < 200; ++i) {
    const double t = std::exp(rng.uniform(-3.0, 6.0));
    const int cls = label_los(entry(50, 1000, t));
    CHECK(cls >= 0);
    CHECK(cls <= 3);
    const bool in0 = t < 6, in1 = t >= 6 && t < 12, in2 = t >= 12 && t < 24, in3 = t >= 24;
    CHECK((cls == 0) == in0);
    CHECK((cls == 1) == in1);
    CHECK((cls == 2) == in2);
    CHECK((cls == 3) == in3);
  }
}

namespace {

std::vector<LabeledWindow> labeled_set(const std::vector<int>& labels) {
  std::vector<LabeledWindow> windows;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    LabeledWindow w;
    w.grid = full_grid(6, static_cast<double>(i));  // value marks identity
    w.grid.stay_id = "s" + std::to_string(i);
    w.mortality_label = labels[i] > 0 ? 1 : 0;
    w.los_class = labels[i];
    w.mortality_label = 1;  // keep invariant: los_class implies label 1
    windows.push_back(w);
  }
  return windows;
}

std::vector<long long> los_counts(const std::vector<LabeledWindow>& windows) {
  std::vector<long long> counts(4, 0);
  for (const auto& w : windows) ++counts[*w.los_class];
  return counts;
}

}  // namespace

TEST_CASE("undersampling balances to the minority count") {
  std::vector<int> labels(120, 0);
  std::fill(labels.begin() + 100, labels.end(), 1);
  auto windows = labeled_set(labels);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    windows[i].mortality_label = labels[i];
    windows[i].los_class.reset();
  }
  const auto extractor = [](const LabeledWindow& w) { return w.mortality_label; };
  const auto balanced = undersample(windows, extractor, 17);
  long long pos = 0, neg = 0;
  for (const auto& w : balanced) (w.mortality_label == 1 ? pos : neg) += 1;
  CHECK(pos == 20);
  CHECK(neg == 20);

  // deterministic, and a subset of the input
  const auto again = undersample(windows, extractor, 17);
  REQUIRE(balanced.size() == again.size());
  for (std::size_t i = 0; i < balanced.size(); ++i)
    CHECK(balanced[i].grid.stay_id == again[i].grid.stay_id);
  std::set<std::string> input_ids;
  for (const auto& w : windows) input_ids.insert(w.grid.stay_id);
  for (const auto& w : balanced) CHECK(input_ids.contains(w.grid.stay_id));
}

TEST_CASE("undersampling keeps balanced input unchanged in counts") {
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) labels.push_back(i % 2);
  auto windows = labeled_set(labels);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    windows[i].mortality_label = labels[i];
    windows[i].los_class.reset();
  }
  const auto balanced =
      undersample(windows, [](const LabeledWindow& w) { return w.mortality_label; }, 5);
  CHECK(balanced.size() == 30);
}

TEST_CASE("undersampling handles four classes") {
  std::vector<int> labels;
  for (int i = 0; i < 50; ++i) labels.push_back(0);
  for (int i = 0; i < 10; ++i) labels.push_back(1);
  for (int i = 0; i < 30; ++i) labels.push_back(2);
  for (int i = 0; i < 10; ++i) labels.push_back(3);
  const auto windows = labeled_set(labels);
  const auto balanced =
      undersample(windows, [](const LabeledWindow& w) { return *w.los_class; }, 9);
  CHECK(los_counts(balanced) == std::vector<long long>{10, 10, 10, 10});
  CHECK_THROWS_AS(undersample({}, [](const LabeledWindow&) { return 0; }, 1), ValidationError);
}
