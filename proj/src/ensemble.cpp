#include "edr/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "edr/error.hpp"
#include "edr/signalcore.hpp"

namespace edr {

std::size_t EnsembledEdr::leading_nulls() const {
  std::size_t k = 0;
  while (k < values.size() && is_null(values[k])) ++k;
  return k;
}

EstimatePool build_pool(const std::vector<EdrEstimate>& estimates, std::size_t zscore_window) {
  if (estimates.size() < 2) throw InputError("ensemble needs at least 2 estimates");
  const std::size_t len = estimates.front().series10.size();
  for (const auto& e : estimates) {
    if (e.series10.size() != len) throw InputError("estimate series lengths differ");
  }

  std::vector<std::vector<double>> columns;
  columns.reserve(estimates.size());
  std::size_t first = 0, last = len;  // common non-null span [first, last)
  for (const auto& e : estimates) {
    std::size_t a = 0;
    while (a < len && is_null(e.series10[a])) ++a;
    std::size_t b = len;
    while (b > a && is_null(e.series10[b - 1])) --b;
    first = std::max(first, a);
    last = std::min(last, b);
    columns.push_back(local_zscore(e.series10, zscore_window));
  }
  if (last <= first) throw DegenerateError("estimates share no common span");

  EstimatePool pool;
  pool.offset = first;
  pool.grid_length = len;
  pool.matrix.resize(static_cast<Eigen::Index>(last - first), static_cast<Eigen::Index>(estimates.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (std::size_t r = first; r < last; ++r) {
      const double v = columns[c][r];
      if (is_null(v)) throw DegenerateError("null inside an estimate's span");
      pool.matrix(static_cast<Eigen::Index>(r - first), static_cast<Eigen::Index>(c)) = v;
    }
    pool.labels.push_back(estimates[c].label());
  }
  return pool;
}

Eigen::MatrixXd lag_embed(const EstimatePool& pool, std::size_t lags) {
  const Eigen::Index rows = pool.matrix.rows();
  const Eigen::Index m = pool.matrix.cols();
  const auto l = static_cast<Eigen::Index>(lags);
  if (lags == 0) throw InputError("lag count must be positive");
  if (rows <= l) throw InputError("pool too short for lag embedding");
  Eigen::MatrixXd b(rows - l + 1, l * m);
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    for (Eigen::Index t = 0; t < l; ++t) {
      b.block(i, t * m, 1, m) = pool.matrix.row(i + l - 1 - t);
    }
  }
  return b;
}

TopSingular top_singular_triplet(const Eigen::MatrixXd& b) {
  if (b.size() == 0) throw InputError("empty lag matrix");
  // Eigen-decomposition of the smaller Gram matrix; its order is at most
  // 10 m (520 for the two-lead pool).
  TopSingular t;
  if (b.rows() <= b.cols()) {
    const Eigen::MatrixXd g = b * b.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g);
    if (solver.info() != Eigen::Success) throw DegenerateError("SVD fusion: eigensolver failed");
    const Eigen::Index n = g.rows();
    t.left = solver.eigenvectors().col(n - 1);
    t.value = std::sqrt(std::max(0.0, solver.eigenvalues()(n - 1)));
    t.second = n > 1 ? std::sqrt(std::max(0.0, solver.eigenvalues()(n - 2))) : 0.0;
  } else {
    const Eigen::MatrixXd g = b.transpose() * b;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g);
    if (solver.info() != Eigen::Success) throw DegenerateError("SVD fusion: eigensolver failed");
    const Eigen::Index n = g.rows();
    const Eigen::VectorXd right = solver.eigenvectors().col(n - 1);
    Eigen::VectorXd left = b * right;
    t.value = left.norm();
    t.second = n > 1 ? std::sqrt(std::max(0.0, solver.eigenvalues()(n - 2))) : 0.0;
    if (t.value > 0.0) left /= t.value;
    t.left = std::move(left);
  }
  return t;
}

EnsembledEdr fuse(const Eigen::MatrixXd& b, const EstimatePool& pool, std::size_t lags) {
  const auto l = static_cast<Eigen::Index>(lags);
  if (b.rows() != pool.matrix.rows() - l + 1) throw InputError("lag matrix does not match pool");
  TopSingular top = top_singular_triplet(b);
  if (!(top.value > 0.0)) throw DegenerateError("lag matrix is zero");

  // Orient with the consensus: correlation with the pool column mean over
  // the rows U covers.
  const Eigen::VectorXd mean = pool.matrix.rowwise().mean().segment(l - 1, b.rows());
  const double dot = (top.left.array() - top.left.mean()).matrix().dot((mean.array() - mean.mean()).matrix());
  if (dot < 0.0) top.left = -top.left;

  EnsembledEdr out;
  out.values.assign(pool.grid_length, kNull);
  const std::size_t start = pool.offset + lags - 1;
  for (Eigen::Index i = 0; i < top.left.size(); ++i) out.values[start + static_cast<std::size_t>(i)] = top.left(i);
  out.singular_value = top.value;
  out.degenerate_spectrum = (top.value - top.second) <= 1e-12 * top.value;
  return out;
}

}  // namespace edr
