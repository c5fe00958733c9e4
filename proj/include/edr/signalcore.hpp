#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace edr {

// Null marker for real sequences. Nulls mark positions outside the span a
// quantity is defined on (e.g. before the first beat, the lag-embedding
// warm-up of the ensembled EDR).
inline constexpr double kNull = std::numeric_limits<double>::quiet_NaN();
inline bool is_null(double v) { return std::isnan(v); }

struct SampledSignal {
  std::vector<double> samples;
  double rate = 1.0;  // Hz
  double t0 = 0.0;    // seconds, time of samples[0]

  std::size_t size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / rate; }
  double time_at(std::size_t i) const { return t0 + static_cast<double>(i) / rate; }
};

// Irregularly sampled values; times strictly increasing.
struct TimedSeries {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const { return times.size(); }
};

// Not-a-knot cubic spline through (x, y). Needs at least 4 knots.
class CubicSpline {
 public:
  CubicSpline(std::span<const double> x, std::span<const double> y);

  // Null outside [front, back].
  double operator()(double t) const;
  // Evaluates the end pieces beyond the span.
  double extrapolate(double t) const;
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

 private:
  double eval_interval(std::size_t i, double t) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> slope_;
};

// Cubic-spline resampling onto a uniform grid at target_rate starting at
// signal.t0, with floor(n * target_rate / rate) output samples.
SampledSignal resample(const SampledSignal& signal, double target_rate);

// Knots with null values are skipped. Grid points outside the knot span
// evaluate to kNull.
std::vector<double> spline_interpolate(const TimedSeries& knots, std::span<const double> grid);

// Sample Pearson correlation over positions where neither input is null.
double pearson(std::span<const double> x, std::span<const double> y);

// (x(i) - mean) / std over the window [i - (window/2 - 1), i + window/2],
// truncated at the edges and skipping nulls. Population std; windows with
// zero spread map to 0. Null inputs stay null.
std::vector<double> local_zscore(std::span<const double> signal, std::size_t window = 100);

}  // namespace edr
