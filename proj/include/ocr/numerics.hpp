#pragma once

// Dense linear algebra kernels and descriptive statistics shared by every
// other module. Storage is Eigen's dynamic dense types.

#include <Eigen/Dense>

#include "ocr/errors.hpp"

namespace ocr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Throws InvalidArgument if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);
void require_finite(const Vector& v, std::string_view what);

/// Throws InvalidArgument unless m is square and symmetric within
/// 1e-10 * max|m_ij|.
void require_symmetric(const Matrix& m, std::string_view what);

/// Lower-triangular Cholesky factorization M = L L^T.
///
/// A pivot at or below p * eps * max(diag(M)) is treated as a loss of
/// definiteness and raises NotPositiveDefinite.
class Cholesky {
 public:
  explicit Cholesky(const Matrix& m);

  /// Adopts an existing lower-triangular factor (e.g. R^T from a QR of the
  /// design). Diagonal entries must be positive.
  static Cholesky from_lower(Matrix lower);

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;
  /// Solves L z = b.
  Vector solve_lower(const Vector& b) const;
  /// Explicit M^{-1}, assembled from solves against the identity. Only used
  /// where the inverse itself is the quantity of interest (covariances).
  Matrix inverse() const;

  const Matrix& lower() const noexcept { return lower_; }
  Eigen::Index size() const noexcept { return lower_.rows(); }

 private:
  Cholesky() = default;
  Matrix lower_;
};

Vector solve_spd(const Matrix& m, const Vector& b);

/// Solves a symmetric, possibly indefinite system (e.g. a KKT saddle point).
/// Raises SingularSystem when the numerical rank is below the dimension.
Vector solve_symmetric_indefinite(const Matrix& m, const Vector& b);

double min_eigenvalue_symmetric(const Matrix& m);

/// Spectral condition number of a symmetric positive definite matrix given
/// its Cholesky factor: (s_max / s_min)^2 for the singular values of L.
double condition_number_spd(const Cholesky& chol);

double mean(const Vector& v);
/// Denominator n - 1 throughout.
double sample_variance(const Vector& v);
double sample_covariance(const Vector& u, const Vector& v);
double sample_sd(const Vector& v);

/// Spearman rank correlation (average ranks on ties).
double spearman_correlation(const Vector& u, const Vector& v);

}  // namespace ocr
