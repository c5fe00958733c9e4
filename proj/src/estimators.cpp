#include "edr/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edr/error.hpp"

namespace edr {

const char* method_name(Method m) {
  switch (m) {
    case Method::trad: return "trad";
    case Method::pca: return "pca";
    case Method::dm: return "dm";
    case Method::cca: return "cca";
    case Method::ad_re: return "ad_re";
    case Method::ad_im: return "ad_im";
    case Method::ad_sym: return "ad_sym";
    case Method::dl: return "dl";
  }
  return "unknown";
}

std::string EdrEstimate::label() const {
  std::string s = method_name(method);
  if (lead != kJointLead) s += "_l" + std::to_string(lead);
  if (component > 0) s += "_" + std::to_string(component);
  return s;
}

namespace {

// Relative eigen/singular value floor below which a component is treated
// as absent (rank deficiency).
constexpr double kRankFloor = 1e-12;

EdrEstimate make_estimate(Method m, int lead, int component, std::span<const double> times,
                          const Eigen::Ref<const Eigen::VectorXd>& values) {
  EdrEstimate e;
  e.method = m;
  e.lead = lead;
  e.component = component;
  e.knots.times.assign(times.begin(), times.end());
  e.knots.values.assign(values.data(), values.data() + values.size());
  return e;
}

EdrEstimate zero_estimate(Method m, int lead, int component, std::span<const double> times, std::string note) {
  auto e = make_estimate(m, lead, component, times, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(times.size())));
  e.degenerate = true;
  e.note = std::move(note);
  return e;
}

void require_times(std::span<const double> times, Eigen::Index rows) {
  if (static_cast<Eigen::Index>(times.size()) != rows) throw InputError("beat times do not match QRS matrix rows");
}

double median_of(std::vector<double>& v) {
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
  const double hi = v[m];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
  return 0.5 * (lo + hi);
}

}  // namespace

KernelSet build_kernels(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw InputError("build_kernels: need at least 2 rows");

  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd xt = x.transpose();  // contiguous rows
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double d = (xt.col(i) - xt.col(j)).squaredNorm();
      d2(i, j) = d;
      d2(j, i) = d;
    }
  }

  KernelSet k;
  k.bandwidth.resize(n);
  std::vector<double> buf;
  buf.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    buf.clear();
    double smallest = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = d2(i, j);
      buf.push_back(d);
      if (d > 0.0 && (smallest == 0.0 || d < smallest)) smallest = d;
    }
    double sigma = median_of(buf);
    if (!(sigma > 0.0)) {
      if (smallest == 0.0) throw DegenerateError("degenerate point cloud");
      sigma = smallest;
    }
    k.bandwidth(i) = sigma;
  }

  k.affinity.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      k.affinity(i, j) = 0.5 * std::exp(-d2(i, j) / k.bandwidth(i)) + 0.5 * std::exp(-d2(i, j) / k.bandwidth(j));
    }
  }

  const Eigen::VectorXd deg = k.affinity.rowwise().sum();
  const Eigen::VectorXd inv_deg = deg.cwiseInverse();
  k.affinity_alpha = inv_deg.asDiagonal() * k.affinity * inv_deg.asDiagonal();
  k.degree_alpha = k.affinity_alpha.rowwise().sum();
  const Eigen::VectorXd inv_sqrt = k.degree_alpha.cwiseSqrt().cwiseInverse();
  k.isotropic = inv_sqrt.asDiagonal() * k.affinity_alpha * inv_sqrt.asDiagonal();
  k.isotropic = 0.5 * (k.isotropic + k.isotropic.transpose()).eval();
  k.markov = k.degree_alpha.cwiseInverse().asDiagonal() * k.affinity_alpha;
  return k;
}

std::vector<double> beat_times(const IndexSequence& r, double rate) {
  std::vector<double> t(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) t[i] = static_cast<double>(r[i]) / rate;
  return t;
}

std::vector<double> joint_beat_times(const IndexSequence& r1, const IndexSequence& r2, double rate) {
  if (r1.size() != r2.size()) throw InputError("joint beat times: unequal beat counts");
  std::vector<double> t(r1.size());
  for (std::size_t i = 0; i < r1.size(); ++i) t[i] = static_cast<double>(r1[i] + r2[i]) / (2.0 * rate);
  return t;
}

EdrEstimate edr_traditional(const SampledSignal& lead, const IndexSequence& r, const IndexSequence& s, int lead_tag) {
  if (r.empty()) throw DegenerateError("no usable beats");
  if (r.size() != s.size()) throw InputError("traditional EDR: R and S counts differ");
  const auto times = beat_times(r, lead.rate);
  Eigen::VectorXd v(static_cast<Eigen::Index>(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) =
        lead.samples[static_cast<std::size_t>(r[i])] - lead.samples[static_cast<std::size_t>(s[i])];
  }
  return make_estimate(Method::trad, lead_tag, 0, times, v);
}

std::vector<EdrEstimate> edr_pca(const QrsMatrix& x, std::span<const double> times, int count) {
  const Eigen::Index n = x.rows.rows();
  require_times(times, n);
  if (n <= count) throw InputError("PCA EDR: need more beats than components");
  const Eigen::RowVectorXd mean = x.rows.colwise().mean();
  const Eigen::MatrixXd centered = x.rows.rowwise() - mean;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  const SpectralBasis b = symmetric_eigen(cov, count);
  check_residuals(b, inf_norm(cov), "PCA");

  const double top = b.size() > 0 ? b.eigenvalues(0).real() : 0.0;
  std::vector<EdrEstimate> out;
  for (int j = 0; j < count; ++j) {
    if (j >= b.size() || !(b.eigenvalues(j).real() > kRankFloor * top)) {
      out.push_back(zero_estimate(Method::pca, x.lead, j + 1, times, "rank-deficient covariance"));
      continue;
    }
    const Eigen::VectorXd p = b.eigenvectors.col(j).real();
    out.push_back(make_estimate(Method::pca, x.lead, j + 1, times, x.rows * p));
  }
  return out;
}

std::vector<EdrEstimate> edr_diffusion_maps(const KernelSet& k, std::span<const double> times, int lead_tag,
                                            int count, SpectralBasis* basis) {
  const Eigen::Index n = k.isotropic.rows();
  require_times(times, n);
  if (n <= count + 1) throw InputError("diffusion maps EDR: need more beats than components");
  const SpectralBasis b = symmetric_eigen(k.isotropic, count + 1);
  check_residuals(b, inf_norm(k.isotropic), "diffusion maps");
  if (b.eigenvalues(1).real() >= 1.0 - 1e-10) throw DegenerateError("disconnected affinity graph");

  const Eigen::VectorXd inv_sqrt = k.degree_alpha.cwiseSqrt().cwiseInverse();
  std::vector<EdrEstimate> out;
  for (int j = 0; j < count; ++j) {
    const Eigen::VectorXd phi = inv_sqrt.cwiseProduct(b.eigenvectors.col(j + 1).real());
    out.push_back(make_estimate(Method::dm, lead_tag, j + 1, times, phi));
  }
  if (basis) *basis = b;
  return out;
}

std::vector<EdrEstimate> edr_cca(const QrsMatrix& x1, const QrsMatrix& x2, std::span<const double> times1,
                                 std::span<const double> times2, int count) {
  if (x1.rows.rows() != x2.rows.rows() || x1.rows.cols() != x2.rows.cols()) {
    throw InputError("CCA EDR: QRS matrix shapes differ");
  }
  require_times(times1, x1.rows.rows());
  require_times(times2, x2.rows.rows());
  const Eigen::MatrixXd cross = x1.rows.transpose() * x2.rows;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const Eigen::Index avail = std::min<Eigen::Index>(count, sv.size());

  std::vector<EdrEstimate> lead1, lead2;
  for (int j = 0; j < count; ++j) {
    if (j >= avail || !(sv(j) > kRankFloor * sv(0))) {
      lead1.push_back(zero_estimate(Method::cca, x1.lead, j + 1, times1, "rank-deficient cross-product"));
      lead2.push_back(zero_estimate(Method::cca, x2.lead, j + 1, times2, "rank-deficient cross-product"));
      continue;
    }
    Eigen::VectorXd u = svd.matrixU().col(j);
    Eigen::VectorXd v = svd.matrixV().col(j);
    Eigen::Index at = 0;
    u.cwiseAbs().maxCoeff(&at);
    if (u(at) < 0.0) {
      u = -u;
      v = -v;
    }
    lead1.push_back(make_estimate(Method::cca, x1.lead, j + 1, times1, x1.rows * u));
    lead2.push_back(make_estimate(Method::cca, x2.lead, j + 1, times2, x2.rows * v));
  }
  lead1.insert(lead1.end(), lead2.begin(), lead2.end());
  return lead1;
}

AlternatingDiffusion alternating_operators(const KernelSet& k1, const KernelSet& k2) {
  if (k1.markov.rows() != k2.markov.rows()) throw InputError("alternating diffusion: unequal beat counts");
  // Both products are formed so that K1 = K2 cancels exactly.
  const Eigen::MatrixXd m12 = k1.markov * k2.markov.transpose();
  const Eigen::MatrixXd m21 = k2.markov * k1.markov.transpose();
  AlternatingDiffusion ad;
  ad.antisymmetric = m12 - m21;
  ad.antisymmetric = 0.5 * (ad.antisymmetric - ad.antisymmetric.transpose()).eval();
  ad.symmetric = m12 + m21;
  ad.symmetric = 0.5 * (ad.symmetric + ad.symmetric.transpose()).eval();
  return ad;
}

std::vector<EdrEstimate> edr_alternating_diffusion(const KernelSet& k1, const KernelSet& k2,
                                                   std::span<const double> times, int count) {
  const AlternatingDiffusion ad = alternating_operators(k1, k2);
  require_times(times, ad.symmetric.rows());
  std::vector<EdrEstimate> re, im, sym;

  const double a_norm = ad.antisymmetric.norm();
  const double s_norm = ad.symmetric.norm();
  SpectralBasis ab;
  const bool degenerate = !(a_norm >= 1e-12 * s_norm) || a_norm == 0.0;
  if (!degenerate) {
    ab = antisymmetric_eigen(ad.antisymmetric, count);
    check_residuals(ab, inf_norm(ad.antisymmetric), "alternating diffusion (antisymmetric)");
  }
  for (int j = 0; j < count; ++j) {
    if (degenerate || j >= ab.size()) {
      const char* why = degenerate ? "antisymmetric operator vanishes" : "too few conjugate pairs";
      re.push_back(zero_estimate(Method::ad_re, kJointLead, j + 1, times, why));
      im.push_back(zero_estimate(Method::ad_im, kJointLead, j + 1, times, why));
      continue;
    }
    re.push_back(make_estimate(Method::ad_re, kJointLead, j + 1, times, ab.eigenvectors.col(j).real()));
    im.push_back(make_estimate(Method::ad_im, kJointLead, j + 1, times, ab.eigenvectors.col(j).imag()));
  }

  const SpectralBasis sb = symmetric_eigen(ad.symmetric, count);
  check_residuals(sb, inf_norm(ad.symmetric), "alternating diffusion (symmetric)");
  for (int j = 0; j < count; ++j) {
    if (j >= sb.size()) {
      sym.push_back(zero_estimate(Method::ad_sym, kJointLead, j + 1, times, "too few beats"));
      continue;
    }
    sym.push_back(make_estimate(Method::ad_sym, kJointLead, j + 1, times, sb.eigenvectors.col(j).real()));
  }

  re.insert(re.end(), im.begin(), im.end());
  re.insert(re.end(), sym.begin(), sym.end());
  return re;
}

std::vector<EdrEstimate> edr_dynamic_laplacian(const KernelSet& k1, const KernelSet& k2,
                                               std::span<const double> times, int count, SpectralBasis* basis) {
  if (k1.markov.rows() != k2.markov.rows()) throw InputError("dynamic Laplacian: unequal beat counts");
  const Eigen::MatrixXd avg = 0.5 * (k1.markov + k2.markov);
  require_times(times, avg.rows());
  const SpectralBasis b = general_eigen(avg, count, 1);
  check_residuals(b, inf_norm(avg), "dynamic Laplacian");
  std::vector<EdrEstimate> out;
  for (int j = 0; j < count; ++j) {
    if (j >= b.size()) {
      out.push_back(zero_estimate(Method::dl, kJointLead, j + 1, times, "too few beats"));
      continue;
    }
    const Eigen::VectorXcd v = b.eigenvectors.col(j);
    auto e = make_estimate(Method::dl, kJointLead, j + 1, times, v.real());
    if (v.imag().norm() > 1e-6 * v.norm()) e.note = "complex eigenvector; real part used";
    out.push_back(std::move(e));
  }
  if (basis) *basis = b;
  return out;
}

std::size_t grid10_length(double duration_seconds) {
  return static_cast<std::size_t>(std::floor(10.0 * duration_seconds + 1e-9));
}

void interpolate_to_10hz(EdrEstimate& est, double duration_seconds) {
  const std::size_t len = grid10_length(duration_seconds);
  std::vector<double> grid(len);
  for (std::size_t i = 0; i < len; ++i) grid[i] = static_cast<double>(i) / 10.0;
  est.series10 = spline_interpolate(est.knots, grid);
}

std::vector<EdrEstimate> compute_estimates(const PreprocessResult& pre, int count) {
  const std::size_t leads = pre.record.leads.size();
  std::vector<EdrEstimate> pool;
  std::vector<KernelSet> kernels;
  std::vector<std::vector<double>> times;
  for (std::size_t k = 0; k < leads; ++k) {
    const int tag = static_cast<int>(k + 1);
    times.push_back(beat_times(pre.beats.r_peaks[k]));
    pool.push_back(edr_traditional(pre.record.leads[k], pre.beats.r_peaks[k], pre.beats.s_peaks[k], tag));
    auto pca = edr_pca(pre.qrs[k], times[k], count);
    pool.insert(pool.end(), pca.begin(), pca.end());
    kernels.push_back(build_kernels(pre.qrs[k]));
    auto dm = edr_diffusion_maps(kernels[k], times[k], tag, count);
    pool.insert(pool.end(), dm.begin(), dm.end());
  }
  if (leads == 2) {
    auto cca = edr_cca(pre.qrs[0], pre.qrs[1], times[0], times[1], count);
    pool.insert(pool.end(), cca.begin(), cca.end());
    const auto joint = joint_beat_times(pre.beats.r_peaks[0], pre.beats.r_peaks[1]);
    auto ad = edr_alternating_diffusion(kernels[0], kernels[1], joint, count);
    pool.insert(pool.end(), ad.begin(), ad.end());
    auto dl = edr_dynamic_laplacian(kernels[0], kernels[1], joint, count);
    pool.insert(pool.end(), dl.begin(), dl.end());
  }
  const double duration = pre.duration;
  for (auto& e : pool) interpolate_to_10hz(e, duration);
  return pool;
}

}  // namespace edr
