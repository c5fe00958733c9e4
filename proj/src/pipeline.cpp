#include "edr/pipeline.hpp"

#include <cmath>
#include <set>

#include "edr/error.hpp"

namespace edr {

namespace {

const char* mode_name(LeadMode m) {
  switch (m) {
    case LeadMode::automatic: return "auto";
    case LeadMode::one_lead: return "one-lead";
    case LeadMode::two_lead: return "two-lead";
  }
  return "auto";
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j, RunConfig c) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  static const std::set<std::string> known = {
      "mode", "components", "lags", "zscore_window", "gamma_max_lag", "gamma_eval_seconds", "segment_seconds",
      "min_beats", "lowpass_cutoff", "lowpass_order", "baseline_window", "match_tolerance", "dsst"};
  static const std::set<std::string> known_dsst = {"window", "gaussian_bandwidth", "soft_log_power",
                                                   "hop", "dft_points", "max_freq"};
  try {
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) throw InputError("unknown config key '" + key + "'");
    }
    if (j.contains("mode")) {
      const auto m = j["mode"].get<std::string>();
      if (m == "auto") c.mode = LeadMode::automatic;
      else if (m == "one-lead") c.mode = LeadMode::one_lead;
      else if (m == "two-lead") c.mode = LeadMode::two_lead;
      else throw InputError("mode must be auto, one-lead or two-lead");
    }
    if (j.contains("components")) c.components = j["components"].get<int>();
    if (j.contains("lags")) c.lags = j["lags"].get<std::size_t>();
    if (j.contains("zscore_window")) c.zscore_window = j["zscore_window"].get<std::size_t>();
    if (j.contains("gamma_max_lag")) c.gamma_max_lag = j["gamma_max_lag"].get<int>();
    if (j.contains("gamma_eval_seconds")) c.gamma_eval_seconds = j["gamma_eval_seconds"].get<double>();
    if (j.contains("segment_seconds")) c.segment_seconds = j["segment_seconds"].get<double>();
    if (j.contains("min_beats")) c.min_beats = j["min_beats"].get<std::size_t>();
    if (j.contains("lowpass_cutoff")) c.preprocess.lowpass_cutoff = j["lowpass_cutoff"].get<double>();
    if (j.contains("lowpass_order")) c.preprocess.lowpass_order = j["lowpass_order"].get<int>();
    if (j.contains("baseline_window")) c.preprocess.baseline_window = j["baseline_window"].get<double>();
    if (j.contains("match_tolerance")) c.preprocess.match_tolerance = j["match_tolerance"].get<double>();
    if (j.contains("dsst")) {
      const auto& d = j["dsst"];
      for (const auto& [key, value] : d.items()) {
        if (!known_dsst.count(key)) throw InputError("unknown dsst config key '" + key + "'");
      }
      if (d.contains("window")) c.dsst.window = d["window"].get<std::size_t>();
      if (d.contains("gaussian_bandwidth")) c.dsst.gaussian_bandwidth = d["gaussian_bandwidth"].get<double>();
      if (d.contains("soft_log_power")) c.dsst.soft_log_power = d["soft_log_power"].get<double>();
      if (d.contains("hop")) c.dsst.hop = d["hop"].get<std::size_t>();
      if (d.contains("dft_points")) c.dsst.dft_points = d["dft_points"].get<std::size_t>();
      if (d.contains("max_freq")) c.dsst.max_freq = d["max_freq"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid config: ") + e.what());
  }
  if (c.components < 1) throw InputError("components must be >= 1");
  if (c.lags < 1) throw InputError("lags must be >= 1");
  if (c.zscore_window < 2) throw InputError("zscore_window must be >= 2");
  if (c.gamma_max_lag < 0) throw InputError("gamma_max_lag must be >= 0");
  if (!(c.gamma_eval_seconds > 0.0)) throw InputError("gamma_eval_seconds must be > 0");
  if (c.segment_seconds < 0.0) throw InputError("segment_seconds must be >= 0");
  if (c.dsst.hop < 1 || c.dsst.window < 2 || c.dsst.dft_points < c.dsst.window) {
    throw InputError("dsst: need hop >= 1 and window <= dft_points");
  }
  return c;
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"mode", mode_name(c.mode)},
          {"components", c.components},
          {"lags", c.lags},
          {"zscore_window", c.zscore_window},
          {"gamma_max_lag", c.gamma_max_lag},
          {"gamma_eval_seconds", c.gamma_eval_seconds},
          {"segment_seconds", c.segment_seconds},
          {"min_beats", c.min_beats},
          {"lowpass_cutoff", c.preprocess.lowpass_cutoff},
          {"lowpass_order", c.preprocess.lowpass_order},
          {"baseline_window", c.preprocess.baseline_window},
          {"match_tolerance", c.preprocess.match_tolerance},
          {"dsst",
           {{"window", c.dsst.window},
            {"gaussian_bandwidth", c.dsst.gaussian_bandwidth},
            {"soft_log_power", c.dsst.soft_log_power},
            {"hop", c.dsst.hop},
            {"dft_points", c.dsst.dft_points},
            {"max_freq", c.dsst.max_freq}}}};
}

nlohmann::json DeriveResult::report() const {
  nlohmann::json flags = nlohmann::json::array();
  for (const auto& e : estimates) {
    if (e.degenerate || !e.note.empty()) flags.push_back({{"estimate", e.label()}, {"degenerate", e.degenerate}, {"note", e.note}});
  }
  if (edr.degenerate_spectrum) flags.push_back({{"estimate", "ensemble"}, {"degenerate", true}, {"note", "repeated top singular value"}});
  std::vector<std::string> labels;
  for (const auto& e : estimates) labels.push_back(e.label());
  return {{"leads", leads},
          {"duration_s", duration},
          {"beats", beats},
          {"detected_per_lead", {preprocess.detected_per_lead[0], preprocess.detected_per_lead[1]}},
          {"matched", preprocess.matched},
          {"dropped_boundary", preprocess.dropped_boundary},
          {"pool_columns", estimates.size()},
          {"pool_labels", labels},
          {"pool_offset", pool.offset},
          {"pool_rows", pool.matrix.rows()},
          {"leading_nulls", edr.leading_nulls()},
          {"singular_value", edr.singular_value},
          {"edr_samples", edr.values.size()},
          {"degeneracy_flags", flags}};
}

DeriveResult derive(std::vector<SampledSignal> leads, const RunConfig& config) {
  if (leads.empty()) throw InputError("no ECG leads");
  if (config.mode == LeadMode::one_lead && leads.size() > 1) leads.resize(1);
  if (config.mode == LeadMode::two_lead && leads.size() != 2) throw InputError("two-lead mode needs two leads");
  if (config.segment_seconds > 0.0) {
    for (auto& l : leads) {
      const auto keep = static_cast<std::size_t>(std::floor(config.segment_seconds * l.rate + 1e-9));
      if (keep < l.size()) l.samples.resize(keep);
    }
  }

  DeriveResult out;
  out.t0 = leads.front().t0;
  out.leads = leads.size();
  const PreprocessResult pre = preprocess(leads, config.preprocess);
  out.preprocess = pre.report;
  out.beats = pre.beats.count();
  out.duration = pre.duration;
  if (out.beats < config.min_beats) {
    throw DegenerateError("unusable segment: " + std::to_string(out.beats) + " beats, need at least " +
                          std::to_string(config.min_beats));
  }
  out.estimates = compute_estimates(pre, config.components);
  out.pool = build_pool(out.estimates, config.zscore_window);
  const auto b = lag_embed(out.pool, config.lags);
  out.edr = fuse(b, out.pool, config.lags);
  return out;
}

nlohmann::json Metrics::to_json() const {
  return {{"reference", reference}, {"gamma", gamma},   {"tau_star", tau_star},
          {"eta", eta},             {"frames", frames}, {"skipped_frames", skipped_frames}};
}

Metrics evaluate(const SampledSignal& edr, const TimedSeries& reference, const RunConfig& config,
                 const std::string& name) {
  if (edr.size() == 0) throw InputError("empty EDR");
  std::vector<double> grid(edr.size());
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = edr.time_at(i);
  const auto ref = spline_interpolate(reference, grid);
  bool overlap = false;
  for (std::size_t i = 0; i < grid.size() && !overlap; ++i) overlap = !is_null(ref[i]) && !is_null(edr.samples[i]);
  if (!overlap) throw InputError(name + ": no overlap between EDR and reference");

  Metrics m;
  m.reference = name;
  const auto g = gamma_index(edr.samples, ref, config.gamma_eval_seconds, config.gamma_max_lag, edr.rate);
  m.gamma = g.gamma;
  m.tau_star = g.tau_star;
  DsSstParams p = config.dsst;
  p.rate = edr.rate;
  const auto e = eta_index(edr.samples, ref, g.tau_star, p);
  m.eta = e.eta;
  m.frames = e.per_frame.size();
  m.skipped_frames = e.skipped_frames;
  return m;
}

}  // namespace edr
