#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "edr/error.hpp"
#include "edr/evaluation.hpp"
#include "edr/signalcore.hpp"
#include "oracles.hpp"

using namespace edr;

namespace {

std::vector<double> sine(double freq, std::size_t n, double phase = 0.0, double rate = 10.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate + phase);
  return x;
}

// Zero-mean train of `width`-sample unit pulses every `period` samples.
std::vector<double> pulse_train(std::size_t n, std::size_t period, std::size_t width) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (i % period) < width ? 1.0 : 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  for (double& v : x) v -= mean;
  return x;
}

double band_energy(const Tfr& t, double f0) {
  const auto c = static_cast<Eigen::Index>(std::lround(f0 / t.bin_width()));
  return t.matrix.middleRows(c - 2, 5).squaredNorm();
}

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

}  // namespace

TEST_CASE("gamma identities") {
  const auto v = noise(1500, 1);
  auto g = gamma_index(v, v);
  CHECK(g.gamma == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(g.tau_star == 0);
  CHECK(g.rho_per_lag.size() == 21);

  std::vector<double> neg(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) neg[i] = -v[i];
  g = gamma_index(neg, v);
  CHECK(g.gamma == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(g.tau_star == 0);

  // u delayed by 5 samples: u(i + 5) = v(i).
  std::vector<double> u(v.size(), kNull);
  for (std::size_t i = 0; i + 5 < v.size(); ++i) u[i + 5] = v[i];
  g = gamma_index(u, v);
  CHECK(g.tau_star == 5);
  CHECK(std::abs(g.gamma - 100.0) <= 1e-10);
}

TEST_CASE("gamma is affine invariant and bounded") {
  const auto v = noise(1400, 2);
  auto u = noise(1400, 3);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 0.4 * u[i] + v[i];
  const auto base = gamma_index(u, v);
  std::vector<double> ua(u.size()), va(v.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    ua[i] = -3.0 * u[i] + 2.0;
    va[i] = 0.5 * v[i] - 7.0;
  }
  const auto moved = gamma_index(ua, va);
  CHECK(moved.gamma == doctest::Approx(base.gamma).epsilon(1e-10));
  CHECK(moved.tau_star == base.tau_star);
  CHECK(base.gamma >= 0.0);
  CHECK(base.gamma <= 100.0);
}

TEST_CASE("gamma starts at the first non-null sample of u and skips nulls") {
  auto v = noise(1400, 4);
  std::vector<double> u = v;
  for (std::size_t i = 0; i < 9; ++i) u[i] = kNull;
  u[300] = kNull;
  const auto g = gamma_index(u, v);
  CHECK(g.tau_star == 0);
  CHECK(g.gamma == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("gamma tie order prefers small lags, negative first") {
  // Period-4 pattern: lags -1 and +1 both correlate perfectly, lag 0 not at all.
  const double pattern[4] = {1.0, 1.0, -1.0, -1.0};
  std::vector<double> v(400), u(400);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = pattern[i % 4];
    u[i] = pattern[(i + 3) % 4];
  }
  const auto g = gamma_index(u, v, 30.0);
  CHECK(g.rho_per_lag[10] == doctest::Approx(0.0).scale(1.0));
  CHECK(g.rho_per_lag[9] == doctest::Approx(1.0));
  CHECK(g.rho_per_lag[11] == doctest::Approx(1.0));
  CHECK(g.tau_star == -1);
  CHECK_THROWS_AS(gamma_index(std::vector<double>(50, kNull), v), DegenerateError);
}

TEST_CASE("wasserstein hand cases") {
  CHECK(wasserstein1(std::vector<double>{0.2, 0.5, 0.3}, std::vector<double>{0.2, 0.5, 0.3}, 1.0) == 0.0);
  CHECK(wasserstein1(std::vector<double>{1, 0, 0}, std::vector<double>{0, 0, 1}, 1.0) == 2.0);
  CHECK(wasserstein1(std::vector<double>{1, 1, 1}, std::vector<double>{1, 0, 0}, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(oracle::w1({1, 1, 1}, {1, 0, 0}, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(wasserstein1(std::vector<double>{0, 0}, std::vector<double>{0, 0}, 1.0) == 0.0);
  CHECK_THROWS_AS(wasserstein1(std::vector<double>{0, 0}, std::vector<double>{0, 1}, 1.0), DegenerateError);
}

TEST_CASE("wasserstein agrees with the oracle, is a metric and shift-consistent") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(40), q(40), r(40);
    for (int i = 0; i < 40; ++i) {
      p[i] = u(rng);
      q[i] = u(rng) * u(rng);
      r[i] = i % 3 ? u(rng) : 0.0;
    }
    const double pq = wasserstein1(p, q, 0.05);
    CHECK(pq == doctest::Approx(oracle::w1(p, q, 0.05)).epsilon(1e-12));
    CHECK(pq == doctest::Approx(wasserstein1(q, p, 0.05)).epsilon(1e-14));
    CHECK(pq <= wasserstein1(p, r, 0.05) + wasserstein1(r, q, 0.05) + 1e-14);
    std::vector<double> ps(48, 0.0), qs(48, 0.0);
    for (int i = 0; i < 40; ++i) {
      ps[i + 5] = p[i];
      qs[i + 5] = q[i];
    }
    CHECK(wasserstein1(ps, qs, 0.05) == doctest::Approx(pq).epsilon(1e-12));
  }
}

TEST_CASE("dsSST on a sinusoid peaks at its frequency") {
  const auto x = sine(0.25, 3000);
  const Tfr t = dsSST(x);
  CHECK(t.matrix.rows() == 151);
  CHECK(t.matrix.cols() == 3000 - 200 + 1);
  CHECK(t.bin_width() == doctest::Approx(1.0 / 30.0));
  CHECK(t.freq_axis.back() == doctest::Approx(5.0));
  CHECK((t.matrix.array() >= 0.0).all());
  std::size_t ok = 0;
  for (Eigen::Index f = 0; f < t.matrix.cols(); ++f) {
    Eigen::Index at = 0;
    t.matrix.col(f).maxCoeff(&at);
    if (std::abs(t.freq_axis[static_cast<std::size_t>(at)] - 0.25) <= t.bin_width() + 1e-12) ++ok;
  }
  CHECK(static_cast<double>(ok) >= 0.95 * static_cast<double>(t.matrix.cols()));
  for (std::size_t i = 1; i < t.time_axis.size(); ++i) CHECK(t.time_axis[i] > t.time_axis[i - 1]);
}

TEST_CASE("dsSST of silence is zero") {
  const Tfr t = dsSST(std::vector<double>(400, 0.0));
  CHECK(t.matrix.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dsSST never creates mass") {
  const auto x = noise(600, 9);
  const DsSstParams p;
  const Stft s = stft(x, p);
  const Eigen::MatrixXd mask = deshape_mask(s, p);
  const Tfr t = dsSST(x, p);
  for (Eigen::Index f = 0; f < t.matrix.cols(); ++f) {
    double deshaped = 0.0;
    for (Eigen::Index m = 0; m < mask.rows(); ++m) deshaped += std::abs(s.values(m, f)) * mask(m, f);
    CHECK(t.matrix.col(f).sum() <= deshaped * (1.0 + 1e-12) + 1e-300);
  }
}

TEST_CASE("dsSST suppresses the second harmonic of an impulse train") {
  const auto x = pulse_train(3000, 50, 1);
  const Tfr plain = spectrogram(x);
  const Tfr ds = dsSST(x);
  CHECK(band_energy(plain, 0.4) / band_energy(plain, 0.2) >= 0.3);
  CHECK(band_energy(ds, 0.4) / band_energy(ds, 0.2) <= 0.1);
}

TEST_CASE("a half-duty square wave has no second harmonic to suppress") {
  const auto x = pulse_train(3000, 50, 25);
  const Tfr plain = spectrogram(x);
  CHECK(band_energy(plain, 0.4) / band_energy(plain, 0.2) < 0.3);
}

TEST_CASE("eta identities") {
  const auto u = sine(0.2, 1200);
  auto e = eta_index(u, u, 0);
  CHECK(e.eta == 0.0);
  CHECK(e.per_frame.size() == 1001);

  auto v = noise(1200, 12);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * v[i] + u[i];
  const auto ab = eta_index(u, v, 0);
  const auto ba = eta_index(v, u, 0);
  CHECK(ab.eta == doctest::Approx(ba.eta).epsilon(1e-12));
  CHECK(ab.eta > 0.0);
}

TEST_CASE("eta between two tones is their frequency gap") {
  const auto a = sine(0.2, 1500);
  const auto b = sine(0.3, 1500);
  const auto e = eta_index(a, b, 0);
  CHECK(std::abs(e.eta - 0.1) <= 2.0 / 30.0);
}

TEST_CASE("eta uses the shifted common span") {
  const auto v = sine(0.27, 800);
  std::vector<double> u(800, kNull);
  for (std::size_t i = 0; i + 5 < 800; ++i) u[i + 5] = v[i];
  const auto span = common_span(u, v, 5);
  CHECK(span.first == 0);
  CHECK(span.second == 795);
  const auto e = eta_index(u, v, 5);
  CHECK(e.eta == 0.0);
  CHECK_THROWS_AS(eta_index(std::vector<double>(100, 1.0), std::vector<double>(100, 1.0), 0), InputError);
}
