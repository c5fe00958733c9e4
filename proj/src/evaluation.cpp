#include "edr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "edr/error.hpp"
#include "edr/signalcore.hpp"

namespace edr {

namespace {

using cplx = std::complex<double>;

std::size_t first_non_null(std::span<const double> x) {
  std::size_t i = 0;
  while (i < x.size() && is_null(x[i])) ++i;
  return i;
}

void validate(const DsSstParams& p) {
  if (p.window < 2 || p.hop < 1 || p.dft_points < p.window || !(p.gaussian_bandwidth > 0.0) ||
      !(p.soft_log_power > 0.0) || !(p.rate > 0.0) || !(p.max_freq > 0.0)) {
    throw InputError("invalid dsSST parameters");
  }
}

std::size_t max_bin(const DsSstParams& p) {
  const double df = p.rate / static_cast<double>(p.dft_points);
  const auto m = static_cast<std::size_t>(std::floor(p.max_freq / df + 1e-9));
  return std::min(m, p.dft_points / 2);
}

std::vector<double> freq_axis(const DsSstParams& p) {
  const double df = p.rate / static_cast<double>(p.dft_points);
  std::vector<double> f(max_bin(p) + 1);
  for (std::size_t m = 0; m < f.size(); ++m) f[m] = static_cast<double>(m) * df;
  return f;
}

}  // namespace

GammaResult gamma_index(std::span<const double> u, std::span<const double> v, double eval_seconds, int max_lag,
                        double rate) {
  if (max_lag < 0) throw InputError("gamma: negative lag range");
  const std::size_t start = first_non_null(u);
  const auto len = static_cast<std::size_t>(std::lround(eval_seconds * rate));
  const auto nu = static_cast<std::ptrdiff_t>(u.size());

  GammaResult res;
  res.rho_per_lag.assign(static_cast<std::size_t>(2 * max_lag + 1), kNull);
  std::vector<double> a, b;
  for (int tau = -max_lag; tau <= max_lag; ++tau) {
    a.clear();
    b.clear();
    for (std::size_t i = start; i < start + len && i < v.size(); ++i) {
      const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + tau;
      if (j < 0 || j >= nu) continue;
      const double x = u[static_cast<std::size_t>(j)];
      const double y = v[i];
      if (is_null(x) || is_null(y)) continue;
      a.push_back(x);
      b.push_back(y);
    }
    if (a.size() < 2) continue;
    try {
      res.rho_per_lag[static_cast<std::size_t>(tau + max_lag)] = std::abs(pearson(a, b));
    } catch (const DegenerateError&) {
      // zero variance at this lag: excluded
    }
  }

  bool found = false;
  double best = 0.0;
  for (int step = 0; step <= max_lag; ++step) {
    for (int tau : {-step, step}) {
      if (step == 0 && tau != 0) continue;
      const double r = res.rho_per_lag[static_cast<std::size_t>(tau + max_lag)];
      if (is_null(r)) continue;
      if (!found || r > best) {
        best = r;
        res.tau_star = tau;
        found = true;
      }
      if (step == 0) break;
    }
  }
  if (!found) throw DegenerateError("gamma: no lag has two overlapping non-null samples with nonzero variance");
  res.gamma = 100.0 * best;
  return res;
}

Stft stft(std::span<const double> signal, const DsSstParams& p) {
  validate(p);
  const std::size_t n = p.dft_points;
  const std::size_t w = p.window;
  if (signal.size() < w) throw InputError("signal shorter than the STFT window");
  for (double x : signal) {
    if (is_null(x)) throw InputError("STFT input contains nulls");
  }

  const double centre = 0.5 * static_cast<double>(w - 1);
  const double sigma = p.gaussian_bandwidth * static_cast<double>(w) / 2.0;
  std::vector<double> g(w), dg(w);
  for (std::size_t k = 0; k < w; ++k) {
    const double tau = static_cast<double>(k) - centre;
    g[k] = std::exp(-tau * tau / (2.0 * sigma * sigma));
    dg[k] = -tau / (sigma * sigma) * g[k] * p.rate;
  }
  std::vector<cplx> shift(n);
  for (std::size_t m = 0; m < n; ++m) {
    shift[m] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(m) * centre / static_cast<double>(n));
  }

  const std::size_t frames = (signal.size() - w) / p.hop + 1;
  Stft out;
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(frames));
  out.derivative.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(frames));
  out.time_axis.resize(frames);

  Eigen::FFT<double> fft;
  std::vector<cplx> in(n), spec(n), in_d(n), spec_d(n);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t a = f * p.hop;
    std::fill(in.begin(), in.end(), cplx(0.0));
    std::fill(in_d.begin(), in_d.end(), cplx(0.0));
    for (std::size_t k = 0; k < w; ++k) {
      in[k] = signal[a + k] * g[k];
      in_d[k] = signal[a + k] * dg[k];
    }
    fft.fwd(spec, in);
    fft.fwd(spec_d, in_d);
    for (std::size_t m = 0; m < n; ++m) {
      out.values(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(f)) = spec[m] * shift[m];
      out.derivative(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(f)) = spec_d[m] * shift[m];
    }
    out.time_axis[f] = (static_cast<double>(a) + centre) / p.rate;
  }
  return out;
}

Tfr spectrogram(std::span<const double> signal, const DsSstParams& p) {
  const Stft s = stft(signal, p);
  Tfr t;
  t.freq_axis = freq_axis(p);
  t.time_axis = s.time_axis;
  t.matrix = s.values.topRows(static_cast<Eigen::Index>(t.freq_axis.size())).cwiseAbs();
  return t;
}

Eigen::MatrixXd deshape_mask(const Stft& s, const DsSstParams& p) {
  const std::size_t n = p.dft_points;
  const std::size_t bins = max_bin(p) + 1;
  const auto frames = s.values.cols();
  Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(bins), frames);

  Eigen::FFT<double> fft;
  std::vector<cplx> soft(n), ceps(n);
  for (Eigen::Index f = 0; f < frames; ++f) {
    for (std::size_t m = 0; m < n; ++m) {
      soft[m] = std::pow(std::abs(s.values(static_cast<Eigen::Index>(m), f)), p.soft_log_power);
    }
    fft.inv(ceps, soft);
    // Quefrency index of frequency bin m is n / m (in samples).
    for (std::size_t m = 1; m < bins; ++m) {
      const double q = static_cast<double>(n) / static_cast<double>(m);
      if (q > static_cast<double>(n) / 2.0) continue;
      const auto k = static_cast<std::size_t>(std::floor(q));
      const double frac = q - static_cast<double>(k);
      const double c0 = ceps[k].real();
      const double c1 = ceps[std::min(k + 1, n - 1)].real();
      mask(static_cast<Eigen::Index>(m), f) = std::max(0.0, (1.0 - frac) * c0 + frac * c1);
    }
  }
  return mask;
}

Tfr dsSST(std::span<const double> signal, const DsSstParams& p) {
  const Stft s = stft(signal, p);
  const Eigen::MatrixXd mask = deshape_mask(s, p);
  const auto bins = mask.rows();
  const auto frames = s.values.cols();
  const double df = p.rate / static_cast<double>(p.dft_points);

  Tfr t;
  t.freq_axis = freq_axis(p);
  t.time_axis = s.time_axis;
  t.matrix = Eigen::MatrixXd::Zero(bins, frames);
  const double peak = s.values.topRows(bins).cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) return t;
  const double threshold = 1e-8 * peak;

  Eigen::VectorXcd column(bins);
  for (Eigen::Index f = 0; f < frames; ++f) {
    column.setZero();
    for (Eigen::Index m = 0; m < bins; ++m) {
      const cplx v = s.values(m, f);
      if (std::abs(v) <= threshold || mask(m, f) == 0.0) continue;
      const double omega = static_cast<double>(m) * df - (s.derivative(m, f) / v).imag() / (2.0 * std::numbers::pi);
      const double target = std::round(omega / df);
      if (target < 0.0 || target >= static_cast<double>(bins)) continue;
      column(static_cast<Eigen::Index>(target)) += v * mask(m, f);
    }
    t.matrix.col(f) = column.cwiseAbs();
  }
  return t;
}

double wasserstein1(std::span<const double> p, std::span<const double> q, double bin_width) {
  if (p.size() != q.size()) throw InputError("wasserstein1: length mismatch");
  double sp = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) throw InputError("wasserstein1: negative mass");
    sp += p[i];
    sq += q[i];
  }
  if (sp == 0.0 && sq == 0.0) return 0.0;
  if (sp == 0.0 || sq == 0.0) throw DegenerateError("wasserstein1: zero mass against positive mass");
  double cp = 0.0, cq = 0.0, total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cp += p[i] / sp;
    cq += q[i] / sq;
    total += std::abs(cp - cq);
  }
  return bin_width * total;
}

std::pair<std::size_t, std::size_t> common_span(std::span<const double> u, std::span<const double> v, int tau) {
  std::size_t best_begin = 0, best_len = 0, run_begin = 0, run_len = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + tau;
    const bool ok = j >= 0 && j < static_cast<std::ptrdiff_t>(u.size()) && !is_null(u[static_cast<std::size_t>(j)]) &&
                    !is_null(v[i]);
    if (ok) {
      if (run_len == 0) run_begin = i;
      ++run_len;
      if (run_len > best_len) {
        best_len = run_len;
        best_begin = run_begin;
      }
    } else {
      run_len = 0;
    }
  }
  return {best_begin, best_begin + best_len};
}

EtaResult eta_index(std::span<const double> u, std::span<const double> v, int tau_star, const DsSstParams& params) {
  const auto [begin, end] = common_span(u, v, tau_star);
  if (end - begin < params.window) throw InputError("eta: common span shorter than the dsSST window");
  std::vector<double> a(end - begin), b(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    a[i - begin] = u[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + tau_star)];
    b[i - begin] = v[i];
  }
  const Tfr ta = dsSST(a, params);
  const Tfr tb = dsSST(b, params);
  const double width = ta.bin_width();

  EtaResult res;
  std::vector<double> pa(static_cast<std::size_t>(ta.matrix.rows())), pb(pa.size());
  for (Eigen::Index f = 0; f < ta.matrix.cols(); ++f) {
    const double ma = ta.matrix.col(f).sum();
    const double mb = tb.matrix.col(f).sum();
    if (ma == 0.0 || mb == 0.0) {
      ++res.skipped_frames;
      continue;
    }
    Eigen::VectorXd::Map(pa.data(), static_cast<Eigen::Index>(pa.size())) = ta.matrix.col(f);
    Eigen::VectorXd::Map(pb.data(), static_cast<Eigen::Index>(pb.size())) = tb.matrix.col(f);
    res.per_frame.push_back(wasserstein1(pa, pb, width));
  }
  if (res.per_frame.empty()) throw DegenerateError("eta: no frame carries mass in both representations");
  double sum = 0.0;
  for (double d : res.per_frame) sum += d;
  res.eta = sum / static_cast<double>(res.per_frame.size());
  return res;
}

}  // namespace edr
