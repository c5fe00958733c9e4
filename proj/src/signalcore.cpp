#include "edr/signalcore.hpp"

#include <algorithm>
#include <cmath>

#include "edr/error.hpp"

namespace edr {

CubicSpline::CubicSpline(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
  const std::size_t n = x_.size();
  if (n != y_.size()) throw InputError("spline knots: length mismatch");
  if (n < 4) throw InputError("insufficient knots");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) throw InputError("spline knots: abscissae must be strictly increasing");
  }

  // Slopes s_i from C2 continuity at interior knots plus not-a-knot
  // conditions at x_1 and x_{n-2}. The system is tridiagonal.
  std::vector<double> dx(n - 1), dd(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    dx[i] = x_[i + 1] - x_[i];
    dd[i] = (y_[i + 1] - y_[i]) / dx[i];
  }
  std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
  const double x31 = x_[2] - x_[0];
  diag[0] = dx[1];
  upper[0] = x31;
  rhs[0] = ((dx[0] + 2.0 * x31) * dx[1] * dd[0] + dx[0] * dx[0] * dd[1]) / x31;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    lower[i] = dx[i];
    diag[i] = 2.0 * (dx[i - 1] + dx[i]);
    upper[i] = dx[i - 1];
    rhs[i] = 3.0 * (dx[i] * dd[i - 1] + dx[i - 1] * dd[i]);
  }
  const std::size_t m = n - 1;
  const double xn = x_[m] - x_[m - 2];
  lower[m] = xn;
  diag[m] = dx[m - 2];
  rhs[m] = (dx[m - 1] * dx[m - 1] * dd[m - 2] + (2.0 * xn + dx[m - 1]) * dx[m - 2] * dd[m - 1]) / xn;

  // Thomas elimination. Pivots stay positive for this system with
  // strictly increasing abscissae.
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  slope_.assign(n, 0.0);
  slope_[m] = rhs[m] / diag[m];
  for (std::size_t i = m; i-- > 0;) {
    slope_[i] = (rhs[i] - upper[i] * slope_[i + 1]) / diag[i];
  }
}

double CubicSpline::eval_interval(std::size_t i, double t) const {
  const double h = x_[i + 1] - x_[i];
  const double u = t - x_[i];
  const double delta = (y_[i + 1] - y_[i]) / h;
  const double c2 = (3.0 * delta - 2.0 * slope_[i] - slope_[i + 1]) / h;
  const double c3 = (slope_[i] + slope_[i + 1] - 2.0 * delta) / (h * h);
  return y_[i] + u * (slope_[i] + u * (c2 + u * c3));
}

double CubicSpline::operator()(double t) const {
  if (!(t >= x_.front() && t <= x_.back())) return kNull;
  return extrapolate(t);
}

double CubicSpline::extrapolate(double t) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - x_.begin());
  i = i == 0 ? 0 : i - 1;
  if (i + 1 >= x_.size()) i = x_.size() - 2;
  if (t == x_[i + 1]) return y_[i + 1];
  return eval_interval(i, t);
}

SampledSignal resample(const SampledSignal& signal, double target_rate) {
  if (!(target_rate > 0.0)) throw InputError("resample: target rate must be positive");
  if (!(signal.rate > 0.0)) throw InputError("resample: source rate must be positive");
  const std::size_t n = signal.size();
  if (n < 4) throw InputError("insufficient samples");
  if (target_rate == signal.rate) return signal;

  // Work in source-sample units so knots sit on integers.
  std::vector<double> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[i] = static_cast<double>(i);
  const CubicSpline spline(pos, signal.samples);

  // Same duration n / rate; the last few outputs extend past the final
  // input sample by less than one source interval.
  const auto count = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * target_rate / signal.rate + 1e-9));
  SampledSignal out;
  out.rate = target_rate;
  out.t0 = signal.t0;
  out.samples.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.samples[k] = spline.extrapolate(static_cast<double>(k) * signal.rate / target_rate);
  }
  return out;
}

std::vector<double> spline_interpolate(const TimedSeries& knots, std::span<const double> grid) {
  if (knots.times.size() != knots.values.size()) throw InputError("spline knots: length mismatch");
  std::vector<double> x, y;
  x.reserve(knots.size());
  y.reserve(knots.size());
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (is_null(knots.values[i]) || is_null(knots.times[i])) continue;
    x.push_back(knots.times[i]);
    y.push_back(knots.values[i]);
  }
  const CubicSpline spline(x, y);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = spline(grid[i]);
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("pearson: length mismatch");
  double sx = 0.0, sy = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (is_null(x[i]) || is_null(y[i])) continue;
    sx += x[i];
    sy += y[i];
    ++count;
  }
  if (count < 2) throw InputError("pearson: fewer than 2 paired samples");
  const double mx = sx / static_cast<double>(count);
  const double my = sy / static_cast<double>(count);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (is_null(x[i]) || is_null(y[i])) continue;
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) throw DegenerateError("degenerate input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> local_zscore(std::span<const double> signal, std::size_t window) {
  if (window < 2) throw InputError("local_zscore: window must be at least 2");
  const std::size_t n = signal.size();
  const std::ptrdiff_t back = static_cast<std::ptrdiff_t>(window / 2) - 1;
  const std::ptrdiff_t ahead = static_cast<std::ptrdiff_t>(window / 2);
  std::vector<double> out(n, kNull);
  for (std::size_t i = 0; i < n; ++i) {
    if (is_null(signal[i])) continue;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(i) - back);
    const std::ptrdiff_t hi =
        std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1, static_cast<std::ptrdiff_t>(i) + ahead);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::ptrdiff_t k = lo; k <= hi; ++k) {
      if (is_null(signal[k])) continue;
      sum += signal[k];
      ++count;
    }
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (std::ptrdiff_t k = lo; k <= hi; ++k) {
      if (is_null(signal[k])) continue;
      const double d = signal[k] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(count));
    const double centered = signal[i] - mean;
    // Spread at rounding level relative to the data counts as zero.
    const double scale = std::max(std::abs(mean), sd);
    out[i] = (sd > 1e-13 * scale && sd > 0.0) ? centered / sd : 0.0;
  }
  return out;
}

}  // namespace edr
