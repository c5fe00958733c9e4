#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "edr/ensemble.hpp"
#include "edr/estimators.hpp"
#include "edr/evaluation.hpp"
#include "edr/preprocess.hpp"
#include "edr/signalcore.hpp"

namespace edr {

enum class LeadMode { automatic, one_lead, two_lead };

struct RunConfig {
  LeadMode mode = LeadMode::automatic;
  PreprocessParams preprocess;
  int components = 5;
  std::size_t lags = kDefaultLags;
  std::size_t zscore_window = kDefaultZscoreWindow;
  int gamma_max_lag = 10;
  double gamma_eval_seconds = 120.0;
  DsSstParams dsst;
  double segment_seconds = 0.0;  // 0 keeps the whole input
  std::size_t min_beats = 10;
};

// Missing keys keep the values already in `base`; unknown keys are errors.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
nlohmann::json to_json(const RunConfig& config);

struct DeriveResult {
  std::vector<EdrEstimate> estimates;
  EstimatePool pool;
  EnsembledEdr edr;
  PreprocessReport preprocess;
  std::size_t beats = 0;
  std::size_t leads = 0;
  double t0 = 0.0;
  double duration = 0.0;

  SampledSignal edr_signal() const { return SampledSignal{edr.values, edr.rate, t0}; }
  nlohmann::json report() const;
};

// Throws DegenerateError when fewer than config.min_beats beats survive.
DeriveResult derive(std::vector<SampledSignal> leads, const RunConfig& config = {});

struct Metrics {
  std::string reference;
  double gamma = 0.0;
  int tau_star = 0;
  double eta = 0.0;
  std::size_t frames = 0;
  std::size_t skipped_frames = 0;

  nlohmann::json to_json() const;
};

// The reference is spline-interpolated onto the EDR's 10 Hz grid.
Metrics evaluate(const SampledSignal& edr, const TimedSeries& reference, const RunConfig& config = {},
                 const std::string& name = "reference");

}  // namespace edr
