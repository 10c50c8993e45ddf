#pragma once

// Ordinary and outcome-calibrated least squares.
//
// The outcome-calibrated fit minimizes ||y - X b||^2 subject to A b = c,
// where the two rows of A encode a calibration slope of one and a
// calibration intercept of zero for the in-sample regression of X b on y.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ocr/calibration.hpp"
#include "ocr/numerics.hpp"

namespace ocr {

enum class Method { OLS, OCR };

std::string_view method_name(Method m);  // "ols" / "ocr"
Method parse_method(std::string_view name);

/// Training sample. When has_intercept_column is set the first column of X
/// must be all ones; it is otherwise treated like any other predictor.
struct Dataset {
  Matrix X;
  Vector y;
  bool has_intercept_column = false;
  std::vector<std::string> column_names;

  Eigen::Index n() const noexcept { return X.rows(); }
  Eigen::Index p() const noexcept { return X.cols(); }

  /// Checks shapes (n > p >= 2), finiteness, the intercept column and that
  /// the outcome is not degenerate.
  void validate() const;
};

/// Validating constructor; fills default column names x1..xp when none are
/// given.
Dataset make_dataset(Matrix X, Vector y, bool has_intercept_column = false,
                     std::vector<std::string> column_names = {});

/// Linear calibration constraints A b = c.
///   row 1: (y - ybar 1)^T X b = (y - ybar 1)^T y    (slope one)
///   row 2: (1/n) 1^T X b      = ybar                (intercept zero)
struct ConstraintSystem {
  Matrix A;  // 2 x p
  Vector c;  // 2

  /// max_i |(A b - c)_i|
  double violation(const Vector& beta) const;
};

struct FittedModel {
  Method method = Method::OLS;
  Vector beta;
  std::optional<ConstraintSystem> constraint;
  double rss = 0.0;
  Eigen::Index residual_df = 0;
  double sigma2_hat = 0.0;
  Matrix coef_cov;
  CalibrationFit calibration;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  Matrix xtx;
  /// Lower Cholesky factor of xtx; reused by inference for leverages.
  Matrix gram_factor;
  bool has_intercept_column = false;
  std::vector<std::string> column_names;

  // diagnostics
  /// Multiplier of the constrained problem in the (1/2n)||y - Xb||^2 scaling.
  Vector multiplier;
  bool used_kkt_fallback = false;
  double gram_condition = 0.0;

  Cholesky gram() const { return Cholesky::from_lower(gram_factor); }
};

/// Condition number of X^T X above which fit_ocr abandons the closed form
/// and solves the full saddle-point system.
inline constexpr double kKktFallbackCondition = 1e10;

ConstraintSystem build_constraints(const Dataset& d);

FittedModel fit_ols(const Dataset& d);
FittedModel fit_ocr(const Dataset& d);
FittedModel fit(const Dataset& d, Method method);

/// K = G^{-1} A^T (A G^{-1} A^T)^{-1} with G = X^T X; a right inverse of A.
Matrix correction_matrix(const Matrix& xtx, const ConstraintSystem& cs);
Matrix correction_matrix(const Cholesky& gram, const ConstraintSystem& cs);

struct Projections {
  Matrix P;  // K A
  Matrix Q;  // I - K A
};

Projections projection_operators(const Matrix& xtx, const ConstraintSystem& cs);

/// G^{-1} - G^{-1} A^T (A G^{-1} A^T)^{-1} A G^{-1}: the OCR coefficient
/// covariance per unit error variance.
Matrix constrained_inverse_gram(const Cholesky& gram, const ConstraintSystem& cs);

Vector predict(const FittedModel& m, const Matrix& X_new);

}  // namespace ocr
