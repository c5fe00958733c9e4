#include "edr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "edr/error.hpp"
#include "edr/io.hpp"

namespace edr {

double RateProfile::at(double t) const {
  if (points.empty()) throw InputError("empty rate profile");
  if (t <= points.front().first) return points.front().second;
  if (t >= points.back().first) return points.back().second;
  auto it = std::upper_bound(points.begin(), points.end(), t,
                             [](double x, const std::pair<double, double>& p) { return x < p.first; });
  const auto& [t1, r1] = *it;
  const auto& [t0, r0] = *(it - 1);
  return r0 + (r1 - r0) * (t - t0) / (t1 - t0);
}

double RateProfile::min() const {
  double m = points.front().second;
  for (const auto& p : points) m = std::min(m, p.second);
  return m;
}

double RateProfile::max() const {
  double m = points.front().second;
  for (const auto& p : points) m = std::max(m, p.second);
  return m;
}

void validate(const SyntheticSpec& spec) {
  auto fail = [](const std::string& msg) { throw InputError("invalid synthetic spec: " + msg); };
  if (!(spec.duration > 0.0)) fail("duration must be > 0");
  if (!(spec.sample_rate >= 100.0)) fail("sample_rate must be >= 100 Hz");
  if (spec.heart_rate.points.empty() || spec.resp_rate.points.empty()) fail("rate profiles must be nonempty");
  for (const auto* prof : {&spec.heart_rate, &spec.resp_rate}) {
    for (std::size_t i = 1; i < prof->points.size(); ++i) {
      if (!(prof->points[i].first > prof->points[i - 1].first)) fail("profile times must increase");
    }
  }
  if (spec.heart_rate.min() < 0.7 || spec.heart_rate.max() > 2.0) fail("heart_rate must lie within [0.7, 2.0] Hz");
  if (spec.resp_rate.min() < 0.1 || spec.resp_rate.max() > 0.5) fail("resp_rate must lie within [0.1, 0.5] Hz");
  if (!(spec.modulation_depth > 0.0 && spec.modulation_depth < 1.0)) fail("modulation_depth must lie in (0, 1)");
  if (spec.lead_phase_offsets.empty() || spec.lead_phase_offsets.size() > 2) fail("one or two leads required");
  if (spec.baseline_wander && (spec.baseline_wander->amplitude < 0.0 || spec.baseline_wander->frequency < 0.0)) {
    fail("baseline_wander amplitude and frequency must be >= 0");
  }
}

double qrs_template(double dt) {
  auto bump = [dt](double centre, double half_width, double amp) {
    const double x = (dt - centre) / half_width;
    return std::abs(x) < 1.0 ? amp * 0.5 * (1.0 + std::cos(std::numbers::pi * x)) : 0.0;
  };
  return bump(-0.015, 0.015, -0.1) + bump(0.0, 0.012, 1.0) + bump(kTemplateSOffset, 0.025, -0.3);
}

namespace {

constexpr double kLeadScale[2] = {1.0, 0.8};

// Respiratory phase integrated on a fine grid.
struct RespPhase {
  double step;
  std::vector<double> phase;

  RespPhase(const RateProfile& rate, double duration) : step(1e-3) {
    const auto n = static_cast<std::size_t>(std::ceil(duration / step)) + 2;
    phase.resize(n);
    phase[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      const double t = (static_cast<double>(i) - 0.5) * step;
      phase[i] = phase[i - 1] + 2.0 * std::numbers::pi * rate.at(t) * step;
    }
  }
  double operator()(double t) const {
    const double x = std::clamp(t / step, 0.0, static_cast<double>(phase.size() - 1));
    const auto i = std::min(static_cast<std::size_t>(x), phase.size() - 2);
    const double f = x - static_cast<double>(i);
    return (1.0 - f) * phase[i] + f * phase[i + 1];
  }
};

}  // namespace

SyntheticRecord generate(const SyntheticSpec& spec) {
  validate(spec);
  const double fs = spec.sample_rate;
  const auto n = static_cast<std::size_t>(std::floor(spec.duration * fs));
  const RespPhase resp(spec.resp_rate, spec.duration);
  auto envelope = [&](double t) { return std::sin(resp(t)); };

  SyntheticRecord rec;
  // Beat times follow the heart-rate profile, snapped to the sample grid.
  for (double t = 0.3; t < spec.duration; t += 1.0 / spec.heart_rate.at(t)) {
    const double snapped = std::round(t * fs) / fs;
    if (!rec.true_r_times.empty() && snapped <= rec.true_r_times.back()) continue;
    rec.true_r_times.push_back(snapped);
  }
  for (double t : rec.true_r_times) {
    rec.true_s_offsets.push_back(kTemplateSOffset);
    rec.modulation.push_back(envelope(t));
  }

  const auto support_lo = static_cast<std::ptrdiff_t>(std::floor(-0.030 * fs));
  const auto support_hi = static_cast<std::ptrdiff_t>(std::ceil(0.060 * fs));
  for (std::size_t k = 0; k < spec.lead_phase_offsets.size(); ++k) {
    SampledSignal lead;
    lead.rate = fs;
    lead.samples.assign(n, 0.0);
    const double gain = std::cos(spec.lead_phase_offsets[k]);
    for (std::size_t b = 0; b < rec.true_r_times.size(); ++b) {
      const double tb = rec.true_r_times[b];
      const double amp = kLeadScale[k] * (1.0 + spec.modulation_depth * rec.modulation[b] * gain);
      const auto centre = static_cast<std::ptrdiff_t>(std::llround(tb * fs));
      for (std::ptrdiff_t j = support_lo; j <= support_hi; ++j) {
        const std::ptrdiff_t i = centre + j;
        if (i < 0 || i >= static_cast<std::ptrdiff_t>(n)) continue;
        lead.samples[static_cast<std::size_t>(i)] += amp * qrs_template(static_cast<double>(i) / fs - tb);
      }
    }
    if (spec.noise_snr_db) {
      double power = 0.0;
      for (double v : lead.samples) power += v * v;
      power /= static_cast<double>(std::max<std::size_t>(1, n));
      const double sd = std::sqrt(power / std::pow(10.0, *spec.noise_snr_db / 10.0));
      std::mt19937_64 rng(spec.seed * 1000003ULL + k);
      std::normal_distribution<double> noise(0.0, sd);
      for (double& v : lead.samples) v += noise(rng);
    }
    if (spec.baseline_wander) {
      const double a = spec.baseline_wander->amplitude;
      const double f = spec.baseline_wander->frequency;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        lead.samples[i] += a * std::sin(2.0 * std::numbers::pi * f * t + static_cast<double>(k));
      }
    }
    rec.leads.push_back(std::move(lead));
  }

  const auto len = static_cast<std::size_t>(std::floor(10.0 * spec.duration + 1e-9));
  rec.true_respiration.rate = 10.0;
  rec.true_respiration.samples.resize(len);
  for (std::size_t i = 0; i < len; ++i) rec.true_respiration.samples[i] = envelope(static_cast<double>(i) / 10.0);
  double mean = 0.0;
  for (double v : rec.true_respiration.samples) mean += v;
  mean /= static_cast<double>(std::max<std::size_t>(1, len));
  double var = 0.0;
  for (double v : rec.true_respiration.samples) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(std::max<std::size_t>(1, len)));
  for (double& v : rec.true_respiration.samples) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  return rec;
}

nlohmann::json to_json(const SyntheticSpec& spec) {
  nlohmann::json j;
  j["duration"] = spec.duration;
  j["sample_rate"] = spec.sample_rate;
  j["heart_rate"] = spec.heart_rate.points;
  j["resp_rate"] = spec.resp_rate.points;
  j["modulation_depth"] = spec.modulation_depth;
  j["lead_phase_offsets"] = spec.lead_phase_offsets;
  j["noise_snr"] = spec.noise_snr_db ? nlohmann::json(*spec.noise_snr_db) : nlohmann::json(nullptr);
  if (spec.baseline_wander) {
    j["baseline_wander"] = {{"amplitude", spec.baseline_wander->amplitude},
                            {"frequency", spec.baseline_wander->frequency}};
  } else {
    j["baseline_wander"] = nullptr;
  }
  j["seed"] = spec.seed;
  return j;
}

namespace {

RateProfile profile_from_json(const nlohmann::json& j) {
  if (j.is_number()) return RateProfile::constant(j.get<double>());
  RateProfile p;
  for (const auto& pt : j) p.points.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
  return p;
}

}  // namespace

SyntheticSpec spec_from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  try {
    if (j.contains("duration")) s.duration = j["duration"].get<double>();
    if (j.contains("sample_rate")) s.sample_rate = j["sample_rate"].get<double>();
    if (j.contains("heart_rate")) s.heart_rate = profile_from_json(j["heart_rate"]);
    if (j.contains("resp_rate")) s.resp_rate = profile_from_json(j["resp_rate"]);
    if (j.contains("modulation_depth")) s.modulation_depth = j["modulation_depth"].get<double>();
    if (j.contains("lead_phase_offsets")) s.lead_phase_offsets = j["lead_phase_offsets"].get<std::vector<double>>();
    if (j.contains("noise_snr") && !j["noise_snr"].is_null()) s.noise_snr_db = j["noise_snr"].get<double>();
    if (j.contains("baseline_wander") && !j["baseline_wander"].is_null()) {
      s.baseline_wander = BaselineWander{j["baseline_wander"].at("amplitude").get<double>(),
                                         j["baseline_wander"].at("frequency").get<double>()};
    }
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid synthetic spec: ") + e.what());
  }
  return s;
}

void export_record(const SyntheticRecord& record, const SyntheticSpec& spec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_ecg_csv(dir / "ecg.csv", record.leads);
  write_series_csv(dir / "respiration.csv", record.true_respiration);

  nlohmann::json truth;
  truth["spec"] = to_json(spec);
  truth["r_times"] = record.true_r_times;
  truth["s_offsets"] = record.true_s_offsets;
  truth["modulation"] = record.modulation;
  truth["ecg_samples"] = record.leads.empty() ? 0 : record.leads.front().size();
  truth["respiration_samples"] = record.true_respiration.size();
  std::ofstream out(dir / "truth.json");
  if (!out) throw InputError("cannot write " + (dir / "truth.json").string());
  out << truth.dump(2) << '\n';
}

}  // namespace edr
