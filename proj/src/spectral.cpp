#include "edr/spectral.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "edr/error.hpp"

namespace edr {

double inf_norm(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
}

double inf_norm(const Eigen::MatrixXcd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
}

void normalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double n = v.norm();
  if (n == 0.0) return;
  v /= n;
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  if (v(k) < 0.0) v = -v;
}

void normalize_phase(Eigen::Ref<Eigen::VectorXcd> v) {
  const double n = v.norm();
  if (n == 0.0) return;
  v /= n;
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  const std::complex<double> phase = std::conj(v(k)) / std::abs(v(k));
  v *= phase;
  v(k) = std::abs(v(k));
}

namespace {

void fill_residual(SpectralBasis& b, const Eigen::MatrixXcd& m) {
  b.max_residual = 0.0;
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    const Eigen::VectorXcd r = m * b.eigenvectors.col(j) - b.eigenvalues(j) * b.eigenvectors.col(j);
    b.max_residual = std::max(b.max_residual, r.norm());
  }
}

}  // namespace

SpectralBasis symmetric_eigen(const Eigen::MatrixXd& m, Eigen::Index count, Eigen::Index skip) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) throw DegenerateError("symmetric eigensolver did not converge");
  const Eigen::Index n = m.rows();
  count = std::max<Eigen::Index>(0, std::min(count, n - skip));
  SpectralBasis b;
  b.eigenvalues.resize(count);
  b.eigenvectors.resize(n, count);
  b.max_residual = 0.0;
  for (Eigen::Index j = 0; j < count; ++j) {
    const Eigen::Index src = n - 1 - skip - j;  // ascending order from the solver
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    normalize_sign(v);
    const double lambda = solver.eigenvalues()(src);
    b.eigenvalues(j) = lambda;
    b.eigenvectors.col(j) = v.cast<std::complex<double>>();
    b.max_residual = std::max(b.max_residual, (m * v - lambda * v).norm());
  }
  return b;
}

SpectralBasis antisymmetric_eigen(const Eigen::MatrixXd& a, Eigen::Index count) {
  const Eigen::MatrixXcd h = std::complex<double>(0.0, 1.0) * a.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success) throw DegenerateError("Hermitian eigensolver did not converge");
  // A v = -i mu v for H v = mu v, so mu < 0 gives Im(lambda) > 0. The
  // solver sorts mu ascending, i.e. by descending magnitude among mu < 0.
  std::vector<Eigen::Index> picked;
  for (Eigen::Index j = 0; j < solver.eigenvalues().size() && static_cast<Eigen::Index>(picked.size()) < count; ++j) {
    if (solver.eigenvalues()(j) < 0.0) picked.push_back(j);
  }
  SpectralBasis b;
  const auto k = static_cast<Eigen::Index>(picked.size());
  b.eigenvalues.resize(k);
  b.eigenvectors.resize(a.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::VectorXcd v = solver.eigenvectors().col(picked[static_cast<std::size_t>(j)]);
    normalize_phase(v);
    b.eigenvalues(j) = std::complex<double>(0.0, -solver.eigenvalues()(picked[static_cast<std::size_t>(j)]));
    b.eigenvectors.col(j) = v;
  }
  fill_residual(b, a.cast<std::complex<double>>());
  return b;
}

SpectralBasis general_eigen(const Eigen::MatrixXd& m, Eigen::Index count, Eigen::Index skip) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, true);
  if (solver.info() != Eigen::Success) throw DegenerateError("general eigensolver did not converge");
  const Eigen::Index n = m.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto& ev = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return ev(x).real() > ev(y).real(); });
  count = std::max<Eigen::Index>(0, std::min(count, n - skip));
  SpectralBasis b;
  b.eigenvalues.resize(count);
  b.eigenvectors.resize(n, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(skip + j)];
    Eigen::VectorXcd v = solver.eigenvectors().col(src);
    normalize_phase(v);
    b.eigenvalues(j) = ev(src);
    b.eigenvectors.col(j) = v;
  }
  fill_residual(b, m.cast<std::complex<double>>());
  return b;
}

void check_residuals(const SpectralBasis& basis, double matrix_norm, const char* what) {
  if (basis.max_residual > kResidualTolerance * std::max(matrix_norm, 1e-300)) {
    std::ostringstream msg;
    msg << what << ": eigensolver residual " << basis.max_residual << " exceeds " << kResidualTolerance
        << " * ||M|| (" << matrix_norm << ")";
    throw DegenerateError(msg.str());
  }
}

}  // namespace edr
