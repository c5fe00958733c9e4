#include "edr/filter.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "edr/error.hpp"

namespace edr {

namespace {

Biquad second_order(Butterworth::Kind kind, double alpha, double wc, double k) {
  // Analog section wc^2 / (s^2 + alpha wc s + wc^2) (lowpass) or
  // s^2 / (...) (highpass), s = k (1 - z^-1) / (1 + z^-1).
  const double a = alpha * wc;
  const double b = wc * wc;
  const double d0 = k * k + a * k + b;
  Biquad s;
  s.a1 = (2.0 * b - 2.0 * k * k) / d0;
  s.a2 = (k * k - a * k + b) / d0;
  if (kind == Butterworth::Kind::lowpass) {
    s.b0 = b / d0;
    s.b1 = 2.0 * b / d0;
    s.b2 = b / d0;
  } else {
    s.b0 = k * k / d0;
    s.b1 = -2.0 * k * k / d0;
    s.b2 = k * k / d0;
  }
  return s;
}

Biquad first_order(Butterworth::Kind kind, double wc, double k) {
  const double d0 = k + wc;
  Biquad s;
  s.a1 = (wc - k) / d0;
  if (kind == Butterworth::Kind::lowpass) {
    s.b0 = wc / d0;
    s.b1 = wc / d0;
  } else {
    s.b0 = k / d0;
    s.b1 = -k / d0;
  }
  return s;
}

void run_section(const Biquad& s, std::vector<double>& x) {
  if (x.empty()) return;
  // Transposed direct form II, steady state for a constant input x[0].
  const double c = x.front();
  const double y0 = s.dc_gain() * c;
  double z2 = s.b2 * c - s.a2 * y0;
  double z1 = s.b1 * c - s.a1 * y0 + z2;
  for (double& v : x) {
    const double in = v;
    const double out = s.b0 * in + z1;
    z1 = s.b1 * in - s.a1 * out + z2;
    z2 = s.b2 * in - s.a2 * out;
    v = out;
  }
}

}  // namespace

Butterworth::Butterworth(Kind kind, int order, double cutoff_hz, double rate_hz)
    : rate_(rate_hz), cutoff_(cutoff_hz) {
  if (order < 1) throw InputError("butterworth: order must be positive");
  if (!(rate_hz > 0.0) || !(cutoff_hz > 0.0)) throw InputError("butterworth: rates must be positive");
  if (cutoff_hz >= rate_hz / 2.0) throw InputError("butterworth: cutoff must be below Nyquist");
  const double k = 2.0 * rate_hz;
  const double wc = k * std::tan(std::numbers::pi * cutoff_hz / rate_hz);
  for (int i = 0; i < order / 2; ++i) {
    // Prototype pole pair exp(+-j theta) in the left half plane.
    const double theta = std::numbers::pi * (2.0 * i + order + 1) / (2.0 * order);
    sections_.push_back(second_order(kind, -2.0 * std::cos(theta), wc, k));
  }
  if (order % 2 == 1) sections_.push_back(first_order(kind, wc, k));
}

std::vector<double> Butterworth::filter(std::span<const double> x) const {
  std::vector<double> y(x.begin(), x.end());
  for (const auto& s : sections_) run_section(s, y);
  return y;
}

std::vector<double> Butterworth::filtfilt(std::span<const double> x) const {
  const std::size_t n = x.size();
  if (n < 2) return std::vector<double>(x.begin(), x.end());
  const auto settle = static_cast<std::size_t>(std::ceil(3.0 * rate_ / cutoff_));
  const std::size_t pad = std::min(n - 1, std::max<std::size_t>(12, settle));

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  for (const auto& s : sections_) run_section(s, ext);
  std::reverse(ext.begin(), ext.end());
  for (const auto& s : sections_) run_section(s, ext);
  std::reverse(ext.begin(), ext.end());
  return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                             ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

double Butterworth::magnitude(double freq_hz) const {
  const std::complex<double> zinv = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / rate_);
  std::complex<double> h = 1.0;
  for (const auto& s : sections_) {
    h *= (s.b0 + s.b1 * zinv + s.b2 * zinv * zinv) / (1.0 + s.a1 * zinv + s.a2 * zinv * zinv);
  }
  return std::abs(h);
}

}  // namespace edr
