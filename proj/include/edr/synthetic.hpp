#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "edr/signalcore.hpp"

namespace edr {

// Piecewise-linear profile over time; one point means constant.
struct RateProfile {
  std::vector<std::pair<double, double>> points;  // (seconds, Hz), times increasing

  static RateProfile constant(double hz) { return RateProfile{{{0.0, hz}}}; }
  double at(double t) const;
  double min() const;
  double max() const;
};

struct BaselineWander {
  double amplitude = 0.0;
  double frequency = 0.0;  // Hz
};

struct SyntheticSpec {
  double duration = 300.0;  // seconds
  double sample_rate = 200.0;
  RateProfile heart_rate = RateProfile::constant(1.2);
  RateProfile resp_rate = RateProfile::constant(0.25);
  double modulation_depth = 0.1;
  std::vector<double> lead_phase_offsets = {0.0, 0.7853981633974483};  // one entry per lead
  std::optional<double> noise_snr_db;
  std::optional<BaselineWander> baseline_wander;
  std::uint64_t seed = 1;
};

// Throws InputError naming the violated bound.
void validate(const SyntheticSpec& spec);

struct SyntheticRecord {
  std::vector<SampledSignal> leads;
  SampledSignal true_respiration;      // 10 Hz, zero mean, unit variance
  std::vector<double> true_r_times;    // seconds
  std::vector<double> true_s_offsets;  // seconds after R, per beat
  std::vector<double> modulation;      // envelope m(t_i) at each beat, in [-1, 1]
};

inline constexpr double kTemplateSOffset = 0.035;

// Q-R-S triplet of raised-cosine bumps on (-30 ms, +60 ms), R = 1 at 0.
double qrs_template(double dt_seconds);

SyntheticRecord generate(const SyntheticSpec& spec);

// ecg.csv (time_s,lead1[,lead2]), respiration.csv (time_s,value) and the
// truth.json sidecar.
void export_record(const SyntheticRecord& record, const SyntheticSpec& spec, const std::filesystem::path& dir);

nlohmann::json to_json(const SyntheticSpec& spec);
SyntheticSpec spec_from_json(const nlohmann::json& j);

}  // namespace edr
