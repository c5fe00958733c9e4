#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace edr {

// Eigenpairs in the order they were selected; vectors are columns with unit
// Euclidean norm and the entry of largest magnitude real and positive.
struct SpectralBasis {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd eigenvectors;
  double max_residual = 0.0;  // max_j ||M v_j - lambda_j v_j||_2

  Eigen::Index size() const { return eigenvalues.size(); }
};

inline constexpr double kResidualTolerance = 1e-8;

// Max absolute row sum.
double inf_norm(const Eigen::MatrixXd& m);
double inf_norm(const Eigen::MatrixXcd& m);

void normalize_sign(Eigen::Ref<Eigen::VectorXd> v);
void normalize_phase(Eigen::Ref<Eigen::VectorXcd> v);

// Eigenpairs of a symmetric matrix by descending eigenvalue, skipping the
// first `skip`.
SpectralBasis symmetric_eigen(const Eigen::MatrixXd& m, Eigen::Index count, Eigen::Index skip = 0);

// Eigenpairs of an antisymmetric matrix taken through the Hermitian matrix
// iA: one representative per conjugate pair (positive imaginary part), by
// descending magnitude.
SpectralBasis antisymmetric_eigen(const Eigen::MatrixXd& a, Eigen::Index count);

// Right eigenpairs of a general real matrix by descending real part,
// skipping the first `skip`.
SpectralBasis general_eigen(const Eigen::MatrixXd& m, Eigen::Index count, Eigen::Index skip = 0);

// Throws DegenerateError when the residual bound is violated.
void check_residuals(const SpectralBasis& basis, double matrix_norm, const char* what);

}  // namespace edr
