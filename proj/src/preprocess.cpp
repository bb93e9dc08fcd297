#include "icupred/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "icupred/prng.hpp"

namespace icupred::preprocess {

using data::kNumChannels;

bool ChannelGrid::fully_observed() const {
  return std::all_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; });
}

bool valid_frame_hours(int frame_hours) {
  return frame_hours == 6 || frame_hours == 12 || frame_hours == 24;
}

std::vector<data::CohortEntry> apply_exclusions(const std::vector<data::CohortEntry>& cohort) {
  std::vector<data::CohortEntry> out;
  out.reserve(cohort.size());
  for (const auto& entry : cohort) {
    if (entry.age_years < 16.0 || entry.age_years > 89.0) continue;
    if (entry.los_hours < 1.0) continue;
    out.push_back(entry);
  }
  return out;
}

ChannelGrid resample_to_grid(const std::vector<data::RawObservation>& obs, int frame_hours) {
  if (!valid_frame_hours(frame_hours))
    throw ValidationError("frame_hours must be 6, 12 or 24");
  ChannelGrid grid;
  grid.frame_hours = frame_hours;
  grid.values = Matrix(frame_hours, kNumChannels);
  grid.mask.assign(static_cast<std::size_t>(frame_hours) * kNumChannels, 0);

  Matrix counts(frame_hours, kNumChannels);
  for (const auto& rec : obs) {
    if (grid.stay_id.empty())
      grid.stay_id = rec.stay_id;
    else if (grid.stay_id != rec.stay_id)
      throw ValidationError("resample_to_grid: observations span multiple stays");
    const int t = rec.offset_minutes / 60;
    if (t >= frame_hours) continue;
    const int c = static_cast<int>(rec.channel);
    grid.values.at(t, c) += rec.value;
    counts.at(t, c) += 1.0;
  }
  for (int t = 0; t < frame_hours; ++t)
    for (int c = 0; c < kNumChannels; ++c)
      if (counts.at(t, c) > 0.0) {
        grid.values.at(t, c) /= counts.at(t, c);
        grid.set_observed(t, c, true);
      }
  return grid;
}

ChannelGrid interpolate_linear(const ChannelGrid& grid) {
  ChannelGrid out = grid;
  const int T = grid.frame_hours;
  for (int c = 0; c < kNumChannels; ++c) {
    int prev = -1;  // last observed row
    for (int t = 0; t < T; ++t) {
      if (!grid.observed(t, c)) continue;
      if (prev >= 0 && t - prev > 1) {
        const double lo = grid.values.at(prev, c);
        const double hi = grid.values.at(t, c);
        for (int k = prev + 1; k < t; ++k) {
          const double w = static_cast<double>(k - prev) / (t - prev);
          out.values.at(k, c) = lo + w * (hi - lo);
          out.set_observed(k, c, true);
        }
      }
      prev = t;
    }
  }
  return out;
}

ChannelStats compute_channel_stats(const std::vector<ChannelGrid>& training_grids) {
  std::array<double, kNumChannels> sum{}, sum_sq{};
  std::array<long long, kNumChannels> count{};
  for (const auto& grid : training_grids)
    for (int t = 0; t < grid.frame_hours; ++t)
      for (int c = 0; c < kNumChannels; ++c)
        if (grid.observed(t, c)) {
          const double v = grid.values.at(t, c);
          sum[c] += v;
          sum_sq[c] += v * v;
          ++count[c];
        }
  ChannelStats stats;
  for (int c = 0; c < kNumChannels; ++c) {
    if (count[c] == 0)
      throw Error(std::string("channel '") +
                  data::channel_name(static_cast<data::VitalChannel>(c)) +
                  "' has no observed cells in the training data");
    stats.mean[c] = sum[c] / count[c];
    const double var = std::max(0.0, sum_sq[c] / count[c] - stats.mean[c] * stats.mean[c]);
    stats.stddev[c] = std::sqrt(var);
  }
  return stats;
}

ChannelGrid impute_mean(const ChannelGrid& grid, const ChannelStats& stats) {
  ChannelGrid out = grid;
  for (int t = 0; t < grid.frame_hours; ++t)
    for (int c = 0; c < kNumChannels; ++c)
      if (!grid.observed(t, c)) {
        out.values.at(t, c) = stats.mean[c];
        out.set_observed(t, c, true);
      }
  return out;
}

ChannelGrid normalize_zscore(const ChannelGrid& grid, const ChannelStats& stats) {
  ChannelGrid out = grid;
  for (int t = 0; t < grid.frame_hours; ++t)
    for (int c = 0; c < kNumChannels; ++c) {
      if (stats.stddev[c] == 0.0)
        out.values.at(t, c) = 0.0;
      else
        out.values.at(t, c) = (grid.values.at(t, c) - stats.mean[c]) / stats.stddev[c];
    }
  return out;
}

int label_mortality(const data::CohortEntry& entry) {
  return entry.death_time_hours.has_value() ? 1 : 0;
}

int label_los(const data::CohortEntry& entry) {
  if (!entry.death_time_hours || *entry.death_time_hours <= 0.0)
    throw ValidationError("label_los requires death_time_hours > 0");
  const double t = *entry.death_time_hours;
  if (t < 6.0) return 0;
  if (t < 12.0) return 1;
  if (t < 24.0) return 2;
  return 3;
}

std::vector<LabeledWindow> undersample(const std::vector<LabeledWindow>& windows,
                                       const std::function<int(const LabeledWindow&)>& label_of,
                                       std::uint64_t seed) {
  if (windows.empty()) throw ValidationError("undersample: empty input");

  std::map<int, std::vector<std::size_t>> by_class;  // ordered for determinism
  for (std::size_t i = 0; i < windows.size(); ++i) by_class[label_of(windows[i])].push_back(i);

  std::size_t min_count = windows.size();
  for (const auto& [cls, idx] : by_class) min_count = std::min(min_count, idx.size());

  RngStream rng(seed);
  std::vector<std::size_t> picked;
  for (auto& [cls, idx] : by_class) {
    rng.shuffle(idx);
    picked.insert(picked.end(), idx.begin(), idx.begin() + min_count);
  }
  std::sort(picked.begin(), picked.end());

  std::vector<LabeledWindow> out;
  out.reserve(picked.size());
  for (std::size_t i : picked) out.push_back(windows[i]);
  return out;
}

}  // namespace icupred::preprocess
