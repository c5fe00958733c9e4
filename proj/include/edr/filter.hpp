#pragma once

#include <span>
#include <vector>

namespace edr {

// One second-order (or first-order when b2 = a2 = 0) section,
// normalised so a0 = 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

// Digital Butterworth filter as a cascade of sections, designed with the
// bilinear transform and frequency prewarping.
class Butterworth {
 public:
  enum class Kind { lowpass, highpass };

  Butterworth(Kind kind, int order, double cutoff_hz, double rate_hz);

  // Single forward pass, state initialised at steady state for x[0].
  std::vector<double> filter(std::span<const double> x) const;

  // Forward-backward application with odd-reflection padding. Zero phase;
  // magnitude response is the single-pass response squared.
  std::vector<double> filtfilt(std::span<const double> x) const;

  // |H(e^{j 2 pi f / fs})| of a single pass.
  double magnitude(double freq_hz) const;

  const std::vector<Biquad>& sections() const { return sections_; }

 private:
  std::vector<Biquad> sections_;
  double rate_;
  double cutoff_;
};

}  // namespace edr
