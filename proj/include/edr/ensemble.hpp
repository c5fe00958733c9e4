#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "edr/estimators.hpp"

namespace edr {

// Locally z-scored 10 Hz estimates restricted to the rows where every
// column is non-null. Row r of `matrix` is grid sample `offset + r`.
struct EstimatePool {
  Eigen::MatrixXd matrix;
  std::vector<std::string> labels;
  std::size_t offset = 0;
  std::size_t grid_length = 0;  // floor(10 T)

  Eigen::Index columns() const { return matrix.cols(); }
};

struct EnsembledEdr {
  std::vector<double> values;  // 10 Hz, length grid_length, null-padded
  double rate = 10.0;
  double singular_value = 0.0;
  bool degenerate_spectrum = false;

  std::size_t leading_nulls() const;
};

inline constexpr std::size_t kDefaultLags = 10;
inline constexpr std::size_t kDefaultZscoreWindow = 100;

EstimatePool build_pool(const std::vector<EdrEstimate>& estimates, std::size_t zscore_window = kDefaultZscoreWindow);

// Row i is [pool(i + lags - 1), ..., pool(i)]: the lags-row history ending
// at pool row i + lags - 1, most recent first.
Eigen::MatrixXd lag_embed(const EstimatePool& pool, std::size_t lags = kDefaultLags);

// Top left-singular vector of B, sign-aligned with the pool's column mean,
// placed on the 10 Hz grid so that entry i of U sits at grid sample
// offset + i + lags - 1.
EnsembledEdr fuse(const Eigen::MatrixXd& b, const EstimatePool& pool, std::size_t lags = kDefaultLags);

struct TopSingular {
  Eigen::VectorXd left;
  double value = 0.0;
  double second = 0.0;
};
TopSingular top_singular_triplet(const Eigen::MatrixXd& b);

}  // namespace edr
