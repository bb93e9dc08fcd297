#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icupred/error.hpp"

namespace icupred::data {

// The eleven monitored vital-sign channels. The ordinal values are part of the
// on-disk and in-memory contract: they index grid columns everywhere.
enum class VitalChannel : int {
  heart_rate = 0,        // beats/min
  systolic_bp = 1,       // mmHg
  diastolic_bp = 2,      // mmHg
  mean_bp = 3,           // mmHg
  respiratory_rate = 4,  // breaths/min
  oxygen_saturation = 5, // %
  glasgow_coma_score = 6,// points, 3-15
  blood_urea_nitrogen = 7, // mg/dL
  temperature = 8,       // degrees C
  white_blood_cells = 9, // 10^3/uL
  bilirubin = 10,        // mg/dL
};

inline constexpr int kNumChannels = 11;

const char* channel_name(VitalChannel c);
std::optional<VitalChannel> channel_from_name(std::string_view name);

// One timestamped measurement of one channel for one ICU stay.
struct RawObservation {
  std::string stay_id;
  VitalChannel channel{};
  int offset_minutes = 0;  // minutes since ICU admission, >= 0
  double value = 0.0;      // finite, channel units

  bool operator==(const RawObservation&) const = default;
};

// Per-stay demographics and outcome. death_time_hours absent means survivor.
struct CohortEntry {
  std::string stay_id;
  std::string patient_id;
  double age_years = 0.0;
  double los_hours = 0.0;  // > 0
  std::optional<double> death_time_hours;

  bool operator==(const CohortEntry&) const = default;
};

struct SyntheticConfig {
  int n_stays = 0;
  double mortality_rate = 0.0;        // in [0, 1]
  double frame_signal_strength = 0.0; // drift magnitude, in baseline sd per 6 h
  double missing_rate = 0.0;          // in [0, 1)
  std::uint64_t seed = 0;

  void validate() const;
};

// CSV ingestion. Format: header `stay_id,channel,offset_minutes,value` /
// `stay_id,patient_id,age_years,los_hours,death_time_hours`, UTF-8, `\n`
// line endings, no quoting. Problems are reported with their line number.
std::vector<RawObservation> parse_observations(std::istream& in);
std::vector<CohortEntry> parse_cohort(std::istream& in);

std::string serialize_observations(const std::vector<RawObservation>& obs);
std::string serialize_cohort(const std::vector<CohortEntry>& cohort);

// Generator constants: per-channel normal baseline, spread, deterioration
// direction and the plausible physical range values are clamped to.
struct ChannelProfile {
  double baseline;
  double sd;
  double drift_direction;  // +1 rises when deteriorating, -1 falls
  double min_value;
  double max_value;
  bool integer_valued;
};

const std::array<ChannelProfile, kNumChannels>& channel_profiles();

struct SyntheticCohort {
  std::vector<CohortEntry> cohort;
  std::vector<RawObservation> observations;
};

// Deterministic synthetic stand-in for the access-gated clinical source.
// Exactly floor(n_stays * mortality_rate) stays are non-survivors; their
// channels drift away from baseline from hour 0 (slope proportional to
// frame_signal_strength, direction per channel_profiles()), with an extra
// severity offset that grows as death approaches so LOS classes stay
// separable within a fixed observation frame. Survivors fluctuate around
// baseline. Every observation is dropped independently with probability
// missing_rate. Output is a pure function of cfg.
SyntheticCohort generate_synthetic_cohort(const SyntheticConfig& cfg);

}  // namespace icupred::data
