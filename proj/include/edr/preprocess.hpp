#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "edr/signalcore.hpp"

namespace edr {

using Index = std::ptrdiff_t;
using IndexSequence = std::vector<Index>;

inline constexpr double kProcessingRate = 1000.0;  // Hz
inline constexpr Index kQrsLeft = 30;                // samples before R
inline constexpr Index kQrsRight = 60;               // samples after R
inline constexpr Index kQrsWidth = kQrsLeft + kQrsRight + 1;  // p = 91

struct EcgRecord {
  std::vector<SampledSignal> leads;  // 1 or 2, all at kProcessingRate, equal length

  std::size_t samples() const { return leads.empty() ? 0 : leads.front().size(); }
  double duration() const { return static_cast<double>(samples()) / kProcessingRate; }
};

// Per-lead R and S sample indices after matching; every lead has the same
// count, and r < s <= r + 60.
struct BeatSet {
  std::vector<IndexSequence> r_peaks;
  std::vector<IndexSequence> s_peaks;

  std::size_t count() const { return r_peaks.empty() ? 0 : r_peaks.front().size(); }
};

struct QrsMatrix {
  Eigen::MatrixXd rows;  // N x 91, temporal row order
  int lead = 1;
};

enum class DetectorVariant { A, B };

SampledSignal lowpass_zero_phase(const SampledSignal& signal, double cutoff_hz = 40.0, int order = 3);

// signal minus its running median; window in samples is made odd and
// truncated at the edges.
SampledSignal remove_baseline(const SampledSignal& signal, double window_seconds = 0.2);
std::vector<double> running_median(std::span<const double> x, std::size_t window);

// Pan-Tompkins style detector. A: 150 ms integration, adaptive thresholds
// with search-back. B: 250 ms integration, fixed-percentile threshold.
IndexSequence detect_r_peaks(const SampledSignal& signal, DetectorVariant variant = DetectorVariant::A);

// Order-preserving, one-to-one nearest matching within tolerance (samples).
std::pair<IndexSequence, IndexSequence> match_beats(const IndexSequence& peaks1, const IndexSequence& peaks2,
                                                    Index tolerance);

// argmin over (r, r + 60]; ties resolve to the earliest index. Beats whose
// window runs past the end are dropped from the result.
IndexSequence locate_s_peaks(const SampledSignal& lead, const IndexSequence& r_peaks);

// Rows are lead[r - 30 .. r + 60]. Beats outside [30, n - 61] are skipped.
QrsMatrix extract_qrs_matrix(const SampledSignal& lead, const IndexSequence& r_peaks, int lead_tag = 1);

struct PreprocessReport {
  std::size_t detected_per_lead[2] = {0, 0};
  std::size_t matched = 0;
  std::size_t dropped_boundary = 0;
};

struct PreprocessResult {
  EcgRecord record;
  BeatSet beats;
  std::vector<QrsMatrix> qrs;  // one per lead
  PreprocessReport report;
  double duration = 0.0;  // seconds, of the raw input (T)
};

struct PreprocessParams {
  double lowpass_cutoff = 40.0;  // Hz
  int lowpass_order = 3;
  double baseline_window = 0.2;  // seconds
  double match_tolerance = 0.150;  // seconds
};

// Resample to 1000 Hz, lowpass, remove baseline, detect and match beats,
// locate S peaks and build the QRS matrices. One-lead input matches the two
// detector variants on the same lead.
PreprocessResult preprocess(const std::vector<SampledSignal>& raw_leads, const PreprocessParams& params = {});

}  // namespace edr
