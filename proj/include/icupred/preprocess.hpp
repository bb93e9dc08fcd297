#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "icupred/data.hpp"
#include "icupred/matrix.hpp"

namespace icupred::preprocess {

// Hourly T x 11 value grid for one stay window. mask is row-major T*11,
// nonzero where the cell is observed (or has been filled).
struct ChannelGrid {
  std::string stay_id;
  int frame_hours = 0;  // one of {6, 12, 24}
  Matrix values;        // frame_hours x 11
  std::vector<std::uint8_t> mask;

  bool observed(int t, int c) const {
    return mask[static_cast<std::size_t>(t) * data::kNumChannels + c] != 0;
  }
  void set_observed(int t, int c, bool v) {
    mask[static_cast<std::size_t>(t) * data::kNumChannels + c] = v ? 1 : 0;
  }
  bool fully_observed() const;

  bool operator==(const ChannelGrid&) const = default;
};

// Per-channel mean/sd over observed cells of the training population.
struct ChannelStats {
  std::array<double, data::kNumChannels> mean{};
  std::array<double, data::kNumChannels> stddev{};

  bool operator==(const ChannelStats&) const = default;
};

struct LabeledWindow {
  ChannelGrid grid;              // normalized
  int mortality_label = 0;       // 0 or 1
  std::optional<int> los_class;  // 0-3, present only for non-survivors
};

bool valid_frame_hours(int frame_hours);

// Retains entries with 16 <= age <= 89 and los_hours >= 1, order preserved.
std::vector<data::CohortEntry> apply_exclusions(const std::vector<data::CohortEntry>& cohort);

// Bins one stay's observations into hourly cells; cell (t,c) is the mean of
// observations of channel c with offset in [60t, 60(t+1)). Observations at or
// beyond the frame are ignored.
ChannelGrid resample_to_grid(const std::vector<data::RawObservation>& obs, int frame_hours);

// Fills every missing cell strictly between two observed cells of the same
// channel by linear interpolation in hour index. Leading/trailing gaps are
// left missing.
ChannelGrid interpolate_linear(const ChannelGrid& grid);

// Mean/population-sd per channel over mask-true cells only. A channel with no
// observed cell anywhere in the training set is an error.
ChannelStats compute_channel_stats(const std::vector<ChannelGrid>& training_grids);

// Sets every still-missing cell of channel c to stats.mean[c]; mask all-true.
ChannelGrid impute_mean(const ChannelGrid& grid, const ChannelStats& stats);

// cell <- (cell - mean) / sd, with sd == 0 mapping the cell to 0.
ChannelGrid normalize_zscore(const ChannelGrid& grid, const ChannelStats& stats);

// 1 iff the stay ended in in-hospital death.
int label_mortality(const data::CohortEntry& entry);

// Time-to-death class: 0 for <6 h, 1 for [6,12), 2 for [12,24), 3 otherwise.
// Requires death_time_hours present and > 0.
int label_los(const data::CohortEntry& entry);

// Uniform-random subset (without replacement) in which every class count
// equals the minimum original class count. Deterministic per seed; selected
// windows keep their input order.
std::vector<LabeledWindow> undersample(const std::vector<LabeledWindow>& windows,
                                       const std::function<int(const LabeledWindow&)>& label_of,
                                       std::uint64_t seed);

}  // namespace icupred::preprocess
