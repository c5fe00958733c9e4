#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "edr/error.hpp"
#include "edr/estimators.hpp"
#include "edr/synthetic.hpp"
#include "oracles.hpp"

using namespace edr;

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::vector<double> uniform_times(std::size_t n, double step = 0.8) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = 0.5 + step * static_cast<double>(i);
  return t;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

// QRS-shaped rows: template scaled by (1 + 0.1 m_i) plus a per-lead nuisance
// shape driven by an independent slow signal.
QrsMatrix modulated_qrs(const std::vector<double>& m, double nuisance_freq, double nuisance_phase, int lead) {
  QrsMatrix q;
  q.lead = lead;
  q.rows.resize(static_cast<Eigen::Index>(m.size()), kQrsWidth);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double nu = std::sin(nuisance_freq * static_cast<double>(i) + nuisance_phase);
    for (Index j = 0; j < kQrsWidth; ++j) {
      const double dt = static_cast<double>(j - kQrsLeft) / 1000.0;
      const double shape = std::exp(-std::pow((dt - 0.05) / 0.008, 2));
      q.rows(static_cast<Eigen::Index>(i), j) = (1.0 + 0.1 * m[i]) * qrs_template(dt) + 0.04 * nu * shape;
    }
  }
  return q;
}

std::vector<double> resp_latent(std::size_t n) {
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = std::sin(2.0 * std::numbers::pi * 0.25 * 0.8 * static_cast<double>(i));
  return m;
}

double best_abs_corr(const std::vector<EdrEstimate>& ests, Method method, const std::vector<double>& m) {
  double best = 0.0;
  for (const auto& e : ests) {
    if (e.method != method || e.degenerate) continue;
    best = std::max(best, std::abs(oracle::correlation(e.knots.values, m)));
  }
  return best;
}

}  // namespace

TEST_CASE("traditional EDR subtracts S from R") {
  SampledSignal lead{std::vector<double>(500, 0.0), 1000.0, 0.0};
  lead.samples[100] = 1.0;
  lead.samples[135] = -0.2;
  lead.samples[300] = 1.0;
  lead.samples[335] = -0.2;
  const auto e = edr_traditional(lead, {100, 300}, {135, 335}, 1);
  CHECK(e.knots.values[0] == doctest::Approx(1.2));
  CHECK(e.knots.values[0] == e.knots.values[1]);
  CHECK(e.knots.times == std::vector<double>{0.1, 0.3});
  CHECK(e.label() == "trad_l1");
}

TEST_CASE("traditional EDR follows the generator modulation") {
  SyntheticSpec spec;
  spec.duration = 120.0;
  const auto rec = generate(spec);
  const auto pre = preprocess(rec.leads);
  const auto e = edr_traditional(pre.record.leads[0], pre.beats.r_peaks[0], pre.beats.s_peaks[0], 1);
  std::vector<double> m;
  for (double t : e.knots.times) m.push_back(std::sin(2.0 * std::numbers::pi * 0.25 * t));
  CHECK(oracle::correlation(e.knots.values, m) >= 0.99);
}

TEST_CASE("PCA on a rank-one matrix") {
  const Eigen::Index n = 40;
  Eigen::VectorXd a(n), b(kQrsWidth);
  for (Eigen::Index i = 0; i < n; ++i) a(i) = std::cos(0.37 * static_cast<double>(i));
  a.array() -= a.mean();
  for (Eigen::Index j = 0; j < kQrsWidth; ++j) b(j) = qrs_template((static_cast<double>(j) - 30.0) / 1000.0);
  QrsMatrix x{a * b.transpose(), 1};
  const auto est = edr_pca(x, uniform_times(static_cast<std::size_t>(n)));
  REQUIRE(est.size() == 5);
  CHECK(std::abs(oracle::correlation(est[0].knots.values, to_vec(a))) == doctest::Approx(1.0).epsilon(1e-12));
  for (int j = 1; j < 5; ++j) {
    CHECK(est[static_cast<std::size_t>(j)].degenerate);
    for (double v : est[static_cast<std::size_t>(j)].knots.values) CHECK(v == 0.0);
  }
}

TEST_CASE("PCA projections of distinct components are uncorrelated") {
  const auto x = random_matrix(200, kQrsWidth, 3);
  const auto est = edr_pca(QrsMatrix{x, 2}, uniform_times(200));
  CHECK(est[2].label() == "pca_l2_3");
  double scale = 0.0;
  for (const auto& e : est) scale = std::max(scale, oracle::dot(e.knots.values, e.knots.values) / 200.0);
  for (std::size_t a = 0; a < est.size(); ++a) {
    for (std::size_t b = a + 1; b < est.size(); ++b) {
      const auto& u = est[a].knots.values;
      const auto& v = est[b].knots.values;
      const double mu = std::accumulate(u.begin(), u.end(), 0.0) / 200.0;
      const double mv = std::accumulate(v.begin(), v.end(), 0.0) / 200.0;
      double cov = 0.0;
      for (std::size_t i = 0; i < 200; ++i) cov += (u[i] - mu) * (v[i] - mv);
      CHECK(std::abs(cov / 199.0) <= 1e-8 * scale);
    }
  }
}

TEST_CASE("PCA on the four-point cross has equal projection variance") {
  Eigen::MatrixXd x(4, 2);
  x << 1, 0, 0, 1, -1, 0, 0, -1;
  // Hand covariance is (2/3) I for this centred cloud.
  oracle::Matrix rows = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const auto cov = oracle::multiply(oracle::transpose(rows), rows);
  CHECK(cov[0][0] / 3.0 == doctest::Approx(2.0 / 3.0));
  CHECK(cov[0][1] == 0.0);
  const auto est = edr_pca(QrsMatrix{x, 1}, uniform_times(4), 2);
  auto var = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return s / 3.0;
  };
  CHECK(var(est[0].knots.values) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(var(est[1].knots.values) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("PCA scales with the matrix") {
  const auto x = random_matrix(30, 8, 9);
  const auto a = edr_pca(QrsMatrix{x, 1}, uniform_times(30), 3);
  const auto b = edr_pca(QrsMatrix{2.5 * x, 1}, uniform_times(30), 3);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 30; ++i) CHECK(b[j].knots.values[i] == doctest::Approx(2.5 * a[j].knots.values[i]).epsilon(1e-9));
}

TEST_CASE("kernel for two points") {
  Eigen::MatrixXd x(2, 3);
  x << 0, 0, 0, 1, 2, 2;
  const auto k = build_kernels(x);
  CHECK(k.bandwidth(0) == 9.0);
  CHECK(k.bandwidth(1) == 9.0);
  CHECK(k.affinity(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(k.affinity(0, 0) == 1.0);
}

TEST_CASE("kernel invariants on random data") {
  const auto x = random_matrix(20, 5, 21);
  const auto k = build_kernels(x);
  const Eigen::Index n = 20;
  for (Eigen::Index i = 0; i < n; ++i) {
    CHECK(k.affinity(i, i) == 1.0);
    CHECK(std::abs(k.markov.row(i).sum() - 1.0) <= 1e-10);
    for (Eigen::Index j = 0; j < n; ++j) {
      CHECK(k.affinity(i, j) > 0.0);
      CHECK(k.affinity(i, j) <= 1.0);
      CHECK(k.affinity(i, j) == k.affinity(j, i));
      CHECK(std::abs(k.isotropic(i, j) - k.isotropic(j, i)) <= 1e-12);
    }
  }
  // Independent check of the bandwidth: median of squared distances.
  std::vector<double> d;
  for (Eigen::Index j = 1; j < n; ++j) d.push_back((x.row(0) - x.row(j)).squaredNorm());
  std::sort(d.begin(), d.end());
  CHECK(k.bandwidth(0) == doctest::Approx(d[9]).epsilon(1e-14));

  oracle::Matrix p(20, std::vector<double>(20));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) p[i][j] = k.isotropic(i, j);
  const auto eig = oracle::jacobi_eigen(p);
  CHECK(std::abs(eig.values[0] - 1.0) <= 1e-10);
}

TEST_CASE("kernel errors") {
  Eigen::MatrixXd same = Eigen::MatrixXd::Ones(5, 3);
  CHECK_THROWS_AS(build_kernels(same), DegenerateError);
  CHECK_THROWS_WITH(build_kernels(same), "degenerate point cloud");
  // Duplicate-dominated row: the median distance is zero, so the smallest
  // positive distance is used instead.
  Eigen::MatrixXd dup(5, 1);
  dup << 0, 0, 0, 0, 3;
  const auto k = build_kernels(dup);
  CHECK(k.bandwidth(0) == 9.0);
}

TEST_CASE("diffusion maps recover the circle") {
  const std::size_t n = 200;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 3);
  std::vector<double> c(n), s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    c[i] = std::cos(th);
    s[i] = std::sin(th);
    x.row(static_cast<Eigen::Index>(i)) << c[i], s[i], 0.0;
  }
  const auto k = build_kernels(x);
  SpectralBasis basis;
  const auto dm = edr_diffusion_maps(k, uniform_times(n), 1, 5, &basis);
  REQUIRE(dm.size() == 5);
  CHECK(basis.max_residual <= 1e-8 * inf_norm(k.isotropic));
  const double rc = oracle::multiple_correlation(c, dm[0].knots.values, dm[1].knots.values);
  const double rs = oracle::multiple_correlation(s, dm[0].knots.values, dm[1].knots.values);
  CHECK(rc >= 0.99);
  CHECK(rs >= 0.99);
  // Top pair is (1, sqrt(D_alpha)).
  CHECK(std::abs(basis.eigenvalues(0).real() - 1.0) <= 1e-10);
}

TEST_CASE("diffusion maps on a modulated QRS matrix") {
  const auto m = resp_latent(150);
  const auto q = modulated_qrs(m, 0.0, 0.0, 1);
  const auto dm = edr_diffusion_maps(build_kernels(q), uniform_times(150), 1);
  CHECK(dm.size() == 5);
  CHECK(dm[4].label() == "dm_l1_5");
  CHECK(best_abs_corr(dm, Method::dm, m) >= 0.9);
}

TEST_CASE("diffusion kernels are scale invariant") {
  const auto x = random_matrix(60, 8, 14);
  const auto a = build_kernels(x);
  const auto b = build_kernels(7.0 * x);
  CHECK((a.affinity - b.affinity).cwiseAbs().maxCoeff() <= 1e-12);
  const auto da = edr_diffusion_maps(a, uniform_times(60), 1, 2);
  const auto db = edr_diffusion_maps(b, uniform_times(60), 1, 2);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(std::abs(oracle::correlation(da[j].knots.values, db[j].knots.values)) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("diffusion maps reject a disconnected graph") {
  // Block-diagonal kernel: eigenvalue 1 twice.
  KernelSet k;
  k.isotropic = Eigen::MatrixXd::Zero(12, 12);
  k.isotropic.topLeftCorner(6, 6).setConstant(1.0 / 6.0);
  k.isotropic.bottomRightCorner(6, 6).setConstant(1.0 / 6.0);
  k.degree_alpha = Eigen::VectorXd::Ones(12);
  CHECK_THROWS_WITH(edr_diffusion_maps(k, uniform_times(12), 1), "disconnected affinity graph");
}

TEST_CASE("CCA against an independent SVD") {
  const auto x1 = random_matrix(10, 3, 41);
  const auto x2 = random_matrix(10, 3, 42);
  const auto cca = edr_cca(QrsMatrix{x1, 1}, QrsMatrix{x2, 2}, uniform_times(10), uniform_times(10), 3);
  REQUIRE(cca.size() == 6);
  CHECK(cca[0].label() == "cca_l1_1");
  CHECK(cca[3].label() == "cca_l2_1");

  oracle::Matrix a(10, std::vector<double>(3)), b(10, std::vector<double>(3));
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 3; ++j) {
      a[i][j] = x1(i, j);
      b[i][j] = x2(i, j);
    }
  const auto c = oracle::multiply(oracle::transpose(a), b);
  const auto left = oracle::jacobi_eigen(oracle::multiply(c, oracle::transpose(c)));
  for (std::size_t j = 0; j < 3; ++j) {
    const auto& u = left.vectors[j];
    const double sigma = std::sqrt(left.values[j]);
    // v = C^T u / sigma pairs with u.
    std::vector<double> v(3, 0.0);
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 3; ++k) v[r] += c[k][r] * u[k] / sigma;
    std::vector<double> p1(10, 0.0), p2(10, 0.0);
    for (int i = 0; i < 10; ++i)
      for (int k = 0; k < 3; ++k) {
        p1[i] += a[i][k] * u[k];
        p2[i] += b[i][k] * v[k];
      }
    const double sgn = oracle::dot(p1, cca[j].knots.values) >= 0.0 ? 1.0 : -1.0;
    for (int i = 0; i < 10; ++i) {
      CHECK(std::abs(cca[j].knots.values[i] - sgn * p1[i]) <= 1e-8);
      CHECK(std::abs(cca[j + 3].knots.values[i] - sgn * p2[i]) <= 1e-8);
    }
  }
}

TEST_CASE("CCA symmetric and shared-latent cases") {
  const auto x = random_matrix(30, 6, 5);
  const auto same = edr_cca(QrsMatrix{x, 1}, QrsMatrix{x, 2}, uniform_times(30), uniform_times(30), 4);
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t i = 0; i < 30; ++i) CHECK(same[j].knots.values[i] == doctest::Approx(same[j + 4].knots.values[i]).epsilon(1e-9));

  Eigen::VectorXd c(30), a(6), b(6);
  for (int i = 0; i < 30; ++i) c(i) = std::sin(0.4 * i) + 0.1;
  a << 1, -2, 0.5, 0, 3, 1;
  b << 0.2, 0.1, -1, 2, 0, 0.4;
  const auto r1 = edr_cca(QrsMatrix{c * a.transpose(), 1}, QrsMatrix{c * b.transpose(), 2}, uniform_times(30),
                          uniform_times(30), 3);
  CHECK(std::abs(oracle::correlation(r1[0].knots.values, to_vec(c))) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(oracle::correlation(r1[3].knots.values, to_vec(c))) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r1[1].degenerate);
  CHECK(r1[5].degenerate);
}

TEST_CASE("alternating diffusion operators") {
  const auto k1 = build_kernels(random_matrix(50, kQrsWidth, 61));
  const auto k2 = build_kernels(random_matrix(50, kQrsWidth, 62));
  const auto ad = alternating_operators(k1, k2);
  const double scale = ad.symmetric.cwiseAbs().maxCoeff();
  CHECK((ad.antisymmetric + ad.antisymmetric.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  CHECK((ad.symmetric - ad.symmetric.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  const Eigen::MatrixXd m = k1.markov * k2.markov.transpose();
  CHECK((ad.antisymmetric - (m - k2.markov * k1.markov.transpose())).cwiseAbs().maxCoeff() <= 1e-12 * scale);

  const Eigen::EigenSolver<Eigen::MatrixXd> es(ad.antisymmetric);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) CHECK(std::abs(es.eigenvalues()(i).real()) <= 1e-10 * scale);

  const auto est = edr_alternating_diffusion(k1, k2, uniform_times(50));
  REQUIRE(est.size() == 15);
  CHECK(est[0].label() == "ad_re_1");
  CHECK(est[5].label() == "ad_im_1");
  CHECK(est[14].label() == "ad_sym_5");
  for (const auto& e : est) CHECK(!e.degenerate);
}

TEST_CASE("alternating diffusion with identical kernels") {
  const auto k = build_kernels(random_matrix(30, 10, 7));
  const auto ad = alternating_operators(k, k);
  CHECK(ad.antisymmetric.cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd s = 2.0 * (k.markov * k.markov.transpose());
  CHECK((ad.symmetric - s).cwiseAbs().maxCoeff() <= 1e-15 * s.cwiseAbs().maxCoeff());
  const auto est = edr_alternating_diffusion(k, k, uniform_times(30));
  for (std::size_t j = 0; j < 10; ++j) {
    CHECK(est[j].degenerate);
    for (double v : est[j].knots.values) CHECK(v == 0.0);
  }
  for (std::size_t j = 10; j < 15; ++j) CHECK(!est[j].degenerate);
}

TEST_CASE("shared latent is recovered by the joint operators") {
  const auto m = resp_latent(160);
  const auto q1 = modulated_qrs(m, 0.11, 0.0, 1);
  const auto q2 = modulated_qrs(m, 0.037, 1.3, 2);
  const auto k1 = build_kernels(q1);
  const auto k2 = build_kernels(q2);
  const auto ad = edr_alternating_diffusion(k1, k2, uniform_times(160));
  CHECK(best_abs_corr(ad, Method::ad_sym, m) >= 0.9);
  const auto dl = edr_dynamic_laplacian(k1, k2, uniform_times(160));
  CHECK(best_abs_corr(dl, Method::dl, m) >= 0.9);
}

TEST_CASE("dynamic Laplacian top pair and identical kernels") {
  const auto k1 = build_kernels(random_matrix(40, 6, 81));
  const auto k2 = build_kernels(random_matrix(40, 6, 82));
  const Eigen::MatrixXd avg = 0.5 * (k1.markov + k2.markov);
  for (Eigen::Index i = 0; i < 40; ++i) CHECK(std::abs(avg.row(i).sum() - 1.0) <= 1e-10);
  const auto top = general_eigen(avg, 1);
  CHECK(std::abs(top.eigenvalues(0) - 1.0) <= 1e-10);
  const Eigen::VectorXcd v = top.eigenvectors.col(0);
  for (Eigen::Index i = 0; i < 40; ++i) CHECK(std::abs(v(i) - v(0)) <= 1e-10);

  SpectralBasis b;
  const auto dl = edr_dynamic_laplacian(k1, k1, uniform_times(40), 5, &b);
  const auto ref = general_eigen(k1.markov, 5, 1);
  for (std::size_t j = 0; j < 5; ++j) {
    const auto& got = dl[j].knots.values;
    for (Eigen::Index i = 0; i < 40; ++i) CHECK(std::abs(got[static_cast<std::size_t>(i)] - ref.eigenvectors(i, static_cast<Eigen::Index>(j)).real()) <= 1e-8);
  }
  CHECK(b.max_residual <= 1e-8 * inf_norm(k1.markov));
  CHECK(dl[0].label() == "dl_1");
}

TEST_CASE("10 Hz interpolation") {
  EdrEstimate e;
  for (int i = 0; i < 20; ++i) {
    e.knots.times.push_back(1.0 + 0.5 * i);
    e.knots.values.push_back(3.0 - 0.25 * (1.0 + 0.5 * i));
  }
  interpolate_to_10hz(e, 12.34);
  REQUIRE(e.series10.size() == 123);
  for (std::size_t i = 0; i < e.series10.size(); ++i) {
    const double t = static_cast<double>(i) / 10.0;
    if (t < 1.0 - 1e-12 || t > 10.5 + 1e-12) {
      CHECK(is_null(e.series10[i]));
    } else {
      CHECK(std::abs(e.series10[i] - (3.0 - 0.25 * t)) <= 1e-10);
    }
  }
  // Knots on the grid come back exactly.
  EdrEstimate g;
  for (int i = 0; i < 10; ++i) {
    g.knots.times.push_back(i * 0.5);
    g.knots.values.push_back(std::sin(i));
  }
  interpolate_to_10hz(g, 5.0);
  for (int i = 0; i < 10; ++i) CHECK(g.series10[static_cast<std::size_t>(5 * i)] == doctest::Approx(std::sin(i)).epsilon(1e-12));
  EdrEstimate few;
  few.knots = {{0.0, 1.0, 2.0}, {1.0, 2.0, 3.0}};
  CHECK_THROWS_AS(interpolate_to_10hz(few, 3.0), InputError);
}

TEST_CASE("pool cardinality from a generated record") {
  SyntheticSpec spec;
  spec.duration = 60.0;
  const auto two = compute_estimates(preprocess(generate(spec).leads));
  CHECK(two.size() == 52);
  spec.lead_phase_offsets = {0.0};
  const auto one = compute_estimates(preprocess(generate(spec).leads));
  CHECK(one.size() == 11);
  for (const auto& e : two) CHECK(e.series10.size() == 600);
}
