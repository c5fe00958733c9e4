#include "edr/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edr/error.hpp"
#include "edr/filter.hpp"

namespace edr {

SampledSignal lowpass_zero_phase(const SampledSignal& signal, double cutoff_hz, int order) {
  const Butterworth lp(Butterworth::Kind::lowpass, order, cutoff_hz, signal.rate);
  SampledSignal out = signal;
  out.samples = lp.filtfilt(signal.samples);
  return out;
}

std::vector<double> running_median(std::span<const double> x, std::size_t window) {
  if (window < 1) throw InputError("running_median: empty window");
  const std::size_t n = x.size();
  const std::size_t half = window / 2;
  std::vector<double> out(n);
  std::vector<double> sorted;
  sorted.reserve(2 * half + 2);
  auto insert = [&](double v) { sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), v), v); };
  auto erase = [&](double v) { sorted.erase(std::lower_bound(sorted.begin(), sorted.end(), v)); };

  for (std::size_t k = 0; k <= std::min(half, n == 0 ? 0 : n - 1) && k < n; ++k) insert(x[k]);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      if (i + half < n) insert(x[i + half]);
      if (i > half) erase(x[i - half - 1]);
    }
    const std::size_t m = sorted.size();
    out[i] = (m % 2 == 1) ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  }
  return out;
}

SampledSignal remove_baseline(const SampledSignal& signal, double window_seconds) {
  auto w = static_cast<std::size_t>(std::lround(window_seconds * signal.rate));
  if (w % 2 == 0) ++w;
  if (w < 3) throw InputError("remove_baseline: window shorter than 3 samples");
  const auto median = running_median(signal.samples, w);
  SampledSignal out = signal;
  for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] -= median[i];
  return out;
}

namespace {

std::vector<double> moving_average_centered(std::span<const double> x, std::size_t window) {
  const std::size_t n = x.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  const std::size_t half = window / 2;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(window);
  }
  return out;
}

// Band-limited, differentiated, squared and integrated QRS energy.
std::vector<double> qrs_energy(const SampledSignal& signal, double integration_seconds) {
  const double fs = signal.rate;
  const Butterworth lp(Butterworth::Kind::lowpass, 2, 15.0, fs);
  const Butterworth hp(Butterworth::Kind::highpass, 2, 5.0, fs);
  const auto band = hp.filtfilt(lp.filtfilt(signal.samples));
  const std::size_t n = band.size();
  std::vector<double> sq(n, 0.0);
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double d = (-band[i - 2] - 2.0 * band[i - 1] + 2.0 * band[i + 1] + band[i + 2]) * fs / 8.0;
    sq[i] = d * d;
  }
  const auto w = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(integration_seconds * fs)));
  return moving_average_centered(sq, w);
}

IndexSequence local_maxima(const std::vector<double>& e) {
  IndexSequence peaks;
  for (std::size_t i = 1; i + 1 < e.size(); ++i) {
    if (e[i] > e[i - 1] && e[i] >= e[i + 1]) peaks.push_back(static_cast<Index>(i));
  }
  return peaks;
}

IndexSequence adaptive_threshold_peaks(const std::vector<double>& e, const IndexSequence& cand, double fs,
                                       Index refractory) {
  const auto learn = std::min<std::size_t>(e.size(), static_cast<std::size_t>(2.0 * fs));
  const double learn_max = *std::max_element(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(learn));
  const double learn_mean =
      std::accumulate(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(learn), 0.0) / static_cast<double>(learn);
  double spki = 0.25 * learn_max;
  double npki = 0.5 * learn_mean;

  IndexSequence qrs;
  std::vector<double> rr;
  auto rr_average = [&]() {
    const std::size_t k = std::min<std::size_t>(8, rr.size());
    return std::accumulate(rr.end() - static_cast<std::ptrdiff_t>(k), rr.end(), 0.0) / static_cast<double>(k);
  };
  auto accept = [&](Index c) {
    if (!qrs.empty()) rr.push_back(static_cast<double>(c - qrs.back()));
    qrs.push_back(c);
  };

  std::size_t last_pos = 0;  // first candidate after the last accepted QRS
  for (std::size_t ci = 0; ci < cand.size(); ++ci) {
    const Index c = cand[ci];
    const double peak = e[static_cast<std::size_t>(c)];
    const double thr1 = npki + 0.25 * (spki - npki);

    // Search back for a missed beat before handling this candidate.
    if (rr.size() >= 2 && !qrs.empty() && static_cast<double>(c - qrs.back()) > 1.66 * rr_average()) {
      Index best = -1;
      double best_val = 0.5 * thr1;
      for (std::size_t k = last_pos; k < ci; ++k) {
        const Index b = cand[k];
        if (b - qrs.back() < refractory || c - b < refractory) continue;
        const double v = e[static_cast<std::size_t>(b)];
        if (v > best_val) {
          best_val = v;
          best = b;
        }
      }
      if (best >= 0) {
        accept(best);
        spki = 0.25 * best_val + 0.75 * spki;
      }
    }

    if (peak > thr1) {
      if (qrs.empty() || c - qrs.back() >= refractory) {
        accept(c);
        spki = 0.125 * peak + 0.875 * spki;
        last_pos = ci + 1;
        continue;
      }
      if (peak > e[static_cast<std::size_t>(qrs.back())]) {
        qrs.back() = c;
        if (qrs.size() >= 2) rr.back() = static_cast<double>(c - qrs[qrs.size() - 2]);
        last_pos = ci + 1;
        continue;
      }
    }
    npki = 0.125 * peak + 0.875 * npki;
  }
  return qrs;
}

IndexSequence percentile_threshold_peaks(const std::vector<double>& e, const IndexSequence& cand,
                                         Index refractory) {
  std::vector<double> sorted(e);
  const auto k = static_cast<std::size_t>(0.98 * static_cast<double>(sorted.size() - 1));
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
  const double thr = 0.3 * sorted[k];
  IndexSequence qrs;
  for (Index c : cand) {
    const double v = e[static_cast<std::size_t>(c)];
    if (v <= thr) continue;
    if (!qrs.empty() && c - qrs.back() < refractory) {
      if (v > e[static_cast<std::size_t>(qrs.back())]) qrs.back() = c;
      continue;
    }
    qrs.push_back(c);
  }
  return qrs;
}

}  // namespace

IndexSequence detect_r_peaks(const SampledSignal& signal, DetectorVariant variant) {
  const double fs = signal.rate;
  const std::size_t n = signal.size();
  if (n < static_cast<std::size_t>(0.5 * fs) || n < 16) return {};
  const auto [mn, mx] = std::minmax_element(signal.samples.begin(), signal.samples.end());
  if (!(*mx > *mn)) return {};

  const double integration = variant == DetectorVariant::A ? 0.150 : 0.250;
  const auto energy = qrs_energy(signal, integration);
  if (*std::max_element(energy.begin(), energy.end()) <= 0.0) return {};
  const auto refractory = static_cast<Index>(std::lround(0.250 * fs));
  const auto cand = local_maxima(energy);
  if (cand.empty()) return {};
  const IndexSequence coarse = variant == DetectorVariant::A
                                   ? adaptive_threshold_peaks(energy, cand, fs, refractory)
                                   : percentile_threshold_peaks(energy, cand, refractory);

  // Refine each energy peak to the lead maximum nearby.
  const auto reach = static_cast<Index>(std::lround((integration / 2.0 + 0.025) * fs));
  IndexSequence r;
  for (Index c : coarse) {
    const Index lo = std::max<Index>(0, c - reach);
    const Index hi = std::min<Index>(static_cast<Index>(n) - 1, c + reach);
    Index best = lo;
    for (Index i = lo + 1; i <= hi; ++i) {
      if (signal.samples[static_cast<std::size_t>(i)] > signal.samples[static_cast<std::size_t>(best)]) best = i;
    }
    if (!r.empty() && best - r.back() < refractory) {
      if (signal.samples[static_cast<std::size_t>(best)] > signal.samples[static_cast<std::size_t>(r.back())]) {
        r.back() = best;
      }
      continue;
    }
    r.push_back(best);
  }
  return r;
}

std::pair<IndexSequence, IndexSequence> match_beats(const IndexSequence& peaks1, const IndexSequence& peaks2,
                                                    Index tolerance) {
  IndexSequence m1, m2;
  std::size_t i = 0, j = 0;
  while (i < peaks1.size() && j < peaks2.size()) {
    const Index a = peaks1[i];
    const Index b = peaks2[j];
    if (b < a - tolerance) {
      ++j;
      continue;
    }
    if (a < b - tolerance) {
      ++i;
      continue;
    }
    const Index d = std::abs(a - b);
    // Defer to a closer partner further along either sequence.
    if (i + 1 < peaks1.size() && std::abs(peaks1[i + 1] - b) < d) {
      ++i;
      continue;
    }
    if (j + 1 < peaks2.size() && std::abs(peaks2[j + 1] - a) < d) {
      ++j;
      continue;
    }
    m1.push_back(a);
    m2.push_back(b);
    ++i;
    ++j;
  }
  return {m1, m2};
}

IndexSequence locate_s_peaks(const SampledSignal& lead, const IndexSequence& r_peaks) {
  const auto n = static_cast<Index>(lead.size());
  IndexSequence s;
  s.reserve(r_peaks.size());
  for (Index r : r_peaks) {
    if (r < 0 || r + kQrsRight >= n) continue;
    Index best = r + 1;
    for (Index t = r + 2; t <= r + kQrsRight; ++t) {
      if (lead.samples[static_cast<std::size_t>(t)] < lead.samples[static_cast<std::size_t>(best)]) best = t;
    }
    s.push_back(best);
  }
  return s;
}

QrsMatrix extract_qrs_matrix(const SampledSignal& lead, const IndexSequence& r_peaks, int lead_tag) {
  const auto n = static_cast<Index>(lead.size());
  std::vector<Index> usable;
  for (Index r : r_peaks) {
    if (r >= kQrsLeft && r + kQrsRight < n) usable.push_back(r);
  }
  if (usable.empty()) throw DegenerateError("no usable beats");
  QrsMatrix x;
  x.lead = lead_tag;
  x.rows.resize(static_cast<Index>(usable.size()), kQrsWidth);
  for (std::size_t i = 0; i < usable.size(); ++i) {
    for (Index j = -kQrsLeft; j <= kQrsRight; ++j) {
      x.rows(static_cast<Index>(i), j + kQrsLeft) = lead.samples[static_cast<std::size_t>(usable[i] + j)];
    }
  }
  return x;
}

PreprocessResult preprocess(const std::vector<SampledSignal>& raw_leads, const PreprocessParams& params) {
  if (raw_leads.empty() || raw_leads.size() > 2) throw InputError("expected one or two ECG leads");
  for (const auto& l : raw_leads) {
    if (l.size() != raw_leads.front().size() || l.rate != raw_leads.front().rate) {
      throw InputError("ECG leads must share length and sampling rate");
    }
  }

  PreprocessResult out;
  out.duration = raw_leads.front().duration();
  for (const auto& raw : raw_leads) {
    auto lead = resample(raw, kProcessingRate);
    lead.t0 = 0.0;
    lead = lowpass_zero_phase(lead, params.lowpass_cutoff, params.lowpass_order);
    lead = remove_baseline(lead, params.baseline_window);
    out.record.leads.push_back(std::move(lead));
  }
  const auto tolerance = static_cast<Index>(std::lround(params.match_tolerance * kProcessingRate));

  IndexSequence r1, r2;
  if (out.record.leads.size() == 2) {
    const auto d1 = detect_r_peaks(out.record.leads[0], DetectorVariant::A);
    const auto d2 = detect_r_peaks(out.record.leads[1], DetectorVariant::A);
    out.report.detected_per_lead[0] = d1.size();
    out.report.detected_per_lead[1] = d2.size();
    std::tie(r1, r2) = match_beats(d1, d2, tolerance);
  } else {
    const auto da = detect_r_peaks(out.record.leads[0], DetectorVariant::A);
    const auto db = detect_r_peaks(out.record.leads[0], DetectorVariant::B);
    out.report.detected_per_lead[0] = da.size();
    out.report.detected_per_lead[1] = db.size();
    std::tie(r1, r2) = match_beats(da, db, tolerance);
  }
  out.report.matched = r1.size();

  // Drop beats whose QRS window leaves the record in any lead.
  const auto n = static_cast<Index>(out.record.samples());
  const std::size_t lead_count = out.record.leads.size();
  out.beats.r_peaks.assign(lead_count, {});
  for (std::size_t i = 0; i < r1.size(); ++i) {
    const bool ok1 = r1[i] >= kQrsLeft && r1[i] + kQrsRight < n;
    const bool ok2 = r2[i] >= kQrsLeft && r2[i] + kQrsRight < n;
    if (!(ok1 && (lead_count == 1 || ok2))) {
      ++out.report.dropped_boundary;
      continue;
    }
    out.beats.r_peaks[0].push_back(r1[i]);
    if (lead_count == 2) out.beats.r_peaks[1].push_back(r2[i]);
  }
  for (std::size_t k = 0; k < lead_count; ++k) {
    out.beats.s_peaks.push_back(locate_s_peaks(out.record.leads[k], out.beats.r_peaks[k]));
  }
  if (out.beats.count() == 0) throw DegenerateError("no usable beats");
  for (std::size_t k = 0; k < lead_count; ++k) {
    out.qrs.push_back(extract_qrs_matrix(out.record.leads[k], out.beats.r_peaks[k], static_cast<int>(k + 1)));
  }
  return out;
}

}  // namespace edr
