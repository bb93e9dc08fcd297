#include "icupred/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_set>

#include "icupred/prng.hpp"

namespace icupred::data {

namespace {

constexpr const char* kChannelNames[kNumChannels] = {
    "heart_rate",       "systolic_bp",       "diastolic_bp",
    "mean_bp",          "respiratory_rate",  "oxygen_saturation",
    "glasgow_coma_score", "blood_urea_nitrogen", "temperature",
    "white_blood_cells", "bilirubin",
};

constexpr const char* kObsHeader = "stay_id,channel,offset_minutes,value";
constexpr const char* kCohortHeader =
    "stay_id,patient_id,age_years,los_hours,death_time_hours";

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view text, std::size_t line_no, const char* what) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError(line_no, std::string("malformed ") + what + " '" + std::string(text) + "'");
  if (!std::isfinite(value))
    throw ParseError(line_no, std::string("non-finite ") + what);
  return value;
}

long parse_int(std::string_view text, std::size_t line_no, const char* what) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError(line_no, std::string("malformed ") + what + " '" + std::string(text) + "'");
  return value;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void check_id(std::string_view id, std::size_t line_no, const char* what) {
  if (id.empty()) throw ParseError(line_no, std::string("empty ") + what);
  if (id.find_first_of(",\n\r") != std::string_view::npos)
    throw ParseError(line_no, std::string(what) + " contains a separator character");
}

// Reads logical lines; tolerates a trailing newline-less last line.
bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

const char* channel_name(VitalChannel c) { return kChannelNames[static_cast<int>(c)]; }

std::optional<VitalChannel> channel_from_name(std::string_view name) {
  for (int i = 0; i < kNumChannels; ++i)
    if (name == kChannelNames[i]) return static_cast<VitalChannel>(i);
  return std::nullopt;
}

void SyntheticConfig::validate() const {
  if (n_stays <= 0) throw ValidationError("synthetic: n_stays must be positive");
  if (mortality_rate < 0.0 || mortality_rate > 1.0)
    throw ValidationError("synthetic: mortality_rate must be in [0,1]");
  if (frame_signal_strength < 0.0)
    throw ValidationError("synthetic: frame_signal_strength must be >= 0");
  if (missing_rate < 0.0 || missing_rate >= 1.0)
    throw ValidationError("synthetic: missing_rate must be in [0,1)");
}

std::vector<RawObservation> parse_observations(std::istream& in) {
  std::string line;
  if (!next_line(in, line) || line != kObsHeader)
    throw ParseError(1, std::string("expected header '") + kObsHeader + "'");
  std::vector<RawObservation> out;
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 4) throw ParseError(line_no, "expected 4 fields");
    RawObservation rec;
    check_id(fields[0], line_no, "stay_id");
    rec.stay_id = std::string(fields[0]);
    const auto channel = channel_from_name(fields[1]);
    if (!channel)
      throw ParseError(line_no, "unknown channel '" + std::string(fields[1]) + "'");
    rec.channel = *channel;
    const long offset = parse_int(fields[2], line_no, "offset_minutes");
    if (offset < 0) throw ParseError(line_no, "negative offset_minutes");
    rec.offset_minutes = static_cast<int>(offset);
    rec.value = parse_double(fields[3], line_no, "value");
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<CohortEntry> parse_cohort(std::istream& in) {
  std::string line;
  if (!next_line(in, line) || line != kCohortHeader)
    throw ParseError(1, std::string("expected header '") + kCohortHeader + "'");
  std::vector<CohortEntry> out;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 5) throw ParseError(line_no, "expected 5 fields");
    CohortEntry rec;
    check_id(fields[0], line_no, "stay_id");
    check_id(fields[1], line_no, "patient_id");
    rec.stay_id = std::string(fields[0]);
    rec.patient_id = std::string(fields[1]);
    if (!seen.insert(rec.stay_id).second)
      throw ParseError(line_no, "duplicate stay_id '" + rec.stay_id + "'");
    rec.age_years = parse_double(fields[2], line_no, "age_years");
    rec.los_hours = parse_double(fields[3], line_no, "los_hours");
    if (rec.los_hours <= 0.0) throw ParseError(line_no, "non-positive los_hours");
    if (!fields[4].empty())
      rec.death_time_hours = parse_double(fields[4], line_no, "death_time_hours");
    out.push_back(std::move(rec));
  }
  return out;
}

std::string serialize_observations(const std::vector<RawObservation>& obs) {
  std::string out = kObsHeader;
  out += '\n';
  std::size_t line_no = 1;
  for (const auto& rec : obs) {
    ++line_no;
    check_id(rec.stay_id, line_no, "stay_id");
    out += rec.stay_id;
    out += ',';
    out += channel_name(rec.channel);
    out += ',';
    out += std::to_string(rec.offset_minutes);
    out += ',';
    out += format_double(rec.value);
    out += '\n';
  }
  return out;
}

std::string serialize_cohort(const std::vector<CohortEntry>& cohort) {
  std::string out = kCohortHeader;
  out += '\n';
  std::size_t line_no = 1;
  for (const auto& rec : cohort) {
    ++line_no;
    check_id(rec.stay_id, line_no, "stay_id");
    check_id(rec.patient_id, line_no, "patient_id");
    out += rec.stay_id;
    out += ',';
    out += rec.patient_id;
    out += ',';
    out += format_double(rec.age_years);
    out += ',';
    out += format_double(rec.los_hours);
    out += ',';
    if (rec.death_time_hours) out += format_double(*rec.death_time_hours);
    out += '\n';
  }
  return out;
}

const std::array<ChannelProfile, kNumChannels>& channel_profiles() {
  // baseline, sd, drift direction, clamp range, integer-valued
  static const std::array<ChannelProfile, kNumChannels> profiles = {{
      {80.0, 10.0, +1.0, 20.0, 220.0, false},   // heart_rate
      {120.0, 15.0, -1.0, 40.0, 260.0, false},  // systolic_bp
      {70.0, 10.0, -1.0, 20.0, 180.0, false},   // diastolic_bp
      {85.0, 10.0, -1.0, 25.0, 200.0, false},   // mean_bp
      {16.0, 3.0, +1.0, 5.0, 55.0, false},      // respiratory_rate
      {97.0, 1.5, -1.0, 55.0, 100.0, false},    // oxygen_saturation
      {15.0, 1.0, -1.0, 3.0, 15.0, true},       // glasgow_coma_score
      {18.0, 6.0, +1.0, 2.0, 200.0, false},     // blood_urea_nitrogen
      {37.0, 0.5, +1.0, 31.0, 42.5, false},     // temperature
      {8.0, 2.5, +1.0, 0.5, 75.0, false},       // white_blood_cells
      {0.8, 0.4, +1.0, 0.05, 40.0, false},      // bilirubin
  }};
  return profiles;
}

namespace {

// Stream tags for the generator's per-purpose sub-streams.
constexpr std::uint64_t kTagStay = 0x5741;

std::string padded_index(const char* prefix, int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%s%06d", prefix, index + 1);
  return buf;
}

}  // namespace

SyntheticCohort generate_synthetic_cohort(const SyntheticConfig& cfg) {
  cfg.validate();
  const auto& profiles = channel_profiles();
  const int n_deaths = static_cast<int>(std::floor(cfg.n_stays * cfg.mortality_rate));

  SyntheticCohort out;
  out.cohort.reserve(cfg.n_stays);
  for (int i = 0; i < cfg.n_stays; ++i) {
    RngStream rng(derive_seed(cfg.seed, kTagStay + static_cast<std::uint64_t>(i) * 2));

    CohortEntry entry;
    entry.stay_id = padded_index("s", i);
    entry.patient_id = padded_index("p", i);
    entry.age_years = std::floor(rng.uniform(20.0, 86.0));

    const bool dies = i < n_deaths;
    if (dies) {
      // Death times are spread across the four LOS classes so the second
      // stage always has examples of each.
      static constexpr double kBinEdges[5] = {1.0, 6.0, 12.0, 24.0, 72.0};
      const int cls = static_cast<int>(rng.uniform_int(4));
      entry.death_time_hours = rng.uniform(kBinEdges[cls], kBinEdges[cls + 1]);
      entry.los_hours = *entry.death_time_hours;  // the stay ends at death
    } else {
      entry.los_hours = rng.uniform(12.0, 168.0);
    }

    const int n_hours = static_cast<int>(std::ceil(entry.los_hours));
    const int max_offset = static_cast<int>(entry.los_hours * 60.0);
    for (int t = 0; t < n_hours; ++t) {
      for (int c = 0; c < kNumChannels; ++c) {
        const ChannelProfile& p = profiles[c];
        const int span = std::min(60, max_offset - 60 * t);
        const int jitter =
            span > 1 ? static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(span))) : 0;
        const int offset = 60 * t + jitter;
        const double hour = offset / 60.0;

        double mean = p.baseline;
        if (dies) {
          // Linear deterioration plus a severity offset that is larger the
          // sooner death occurs, so early deaths look sicker from hour 0.
          const double s = cfg.frame_signal_strength;
          const double drift = s * (hour / 6.0);
          const double severity = 0.5 * s * std::min(6.0 / *entry.death_time_hours, 6.0);
          mean += p.drift_direction * p.sd * (drift + severity);
        }
        double value = rng.normal(mean, p.sd);
        value = std::clamp(value, p.min_value, p.max_value);
        if (p.integer_valued) value = std::round(value);

        const bool dropped = rng.bernoulli(cfg.missing_rate);
        if (!dropped)
          out.observations.push_back({entry.stay_id, static_cast<VitalChannel>(c), offset, value});
      }
    }
    out.cohort.push_back(std::move(entry));
  }
  return out;
}

}  // namespace icupred::data
