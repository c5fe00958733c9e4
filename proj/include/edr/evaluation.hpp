#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace edr {

struct GammaResult {
  double gamma = 0.0;              // 100 * max |rho|
  int tau_star = 0;                // samples at 10 Hz
  std::vector<double> rho_per_lag; // index tau + max_lag; null for excluded lags
};

// rho_tau = |pearson(u(i + tau), v(i))| over the first eval_seconds * 10
// samples starting at u's first non-null sample. Ties prefer the smallest
// |tau|, then the negative lag.
GammaResult gamma_index(std::span<const double> u, std::span<const double> v, double eval_seconds = 120.0,
                        int max_lag = 10, double rate = 10.0);

struct DsSstParams {
  std::size_t window = 200;
  double gaussian_bandwidth = 0.15;  // sigma = bandwidth * window / 2 samples
  double soft_log_power = 0.03;
  std::size_t hop = 1;
  std::size_t dft_points = 300;
  double rate = 10.0;       // Hz
  double max_freq = 5.0;    // Hz
};

// Nonnegative time-frequency matrix, frequency bins x frames.
struct Tfr {
  Eigen::MatrixXd matrix;
  std::vector<double> freq_axis;  // Hz
  std::vector<double> time_axis;  // seconds, frame centres
  double bin_width() const { return freq_axis.size() > 1 ? freq_axis[1] - freq_axis[0] : 0.0; }
};

// Gaussian-window STFT and its derivative-window companion. Frames are the
// positions where the whole window fits; phases are referenced to the
// window centre.
struct Stft {
  Eigen::MatrixXcd values;       // bins 0 .. dft_points - 1
  Eigen::MatrixXcd derivative;   // STFT with g'(t), g' in 1/s
  std::vector<double> time_axis;
};
Stft stft(std::span<const double> signal, const DsSstParams& params);

// |STFT| restricted to [0, max_freq].
Tfr spectrogram(std::span<const double> signal, const DsSstParams& params = {});

// De-shape mask: positive part of the soft-log cepstrum read at quefrency
// 1/xi, one column per frame, bins 0 .. max_freq.
Eigen::MatrixXd deshape_mask(const Stft& s, const DsSstParams& params);

Tfr dsSST(std::span<const double> signal, const DsSstParams& params = {});

// bin_width * sum |CDF(p) - CDF(q)| after l1-normalising both inputs.
double wasserstein1(std::span<const double> p, std::span<const double> q, double bin_width);

struct EtaResult {
  double eta = 0.0;               // Hz
  std::vector<double> per_frame;  // W1 per compared frame
  std::size_t skipped_frames = 0; // frames with zero mass in either TFR
};

// u(i + tau_star) against v(i) on their common non-null span.
EtaResult eta_index(std::span<const double> u, std::span<const double> v, int tau_star,
                    const DsSstParams& params = {});

// Longest run where both shifted u and v are non-null, as [begin, end).
std::pair<std::size_t, std::size_t> common_span(std::span<const double> u, std::span<const double> v, int tau);

}  // namespace edr
