#pragma once

// Standard errors, intervals and Wald tests for OLS and OCR fits. OCR
// inference conditions on the calibration constraints, i.e. A and c are
// treated as fixed even though they are computed from y.

#include "ocr/estimators.hpp"

namespace ocr {

struct IntervalEstimate {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;

  bool contains(double value) const noexcept { return lower <= value && value <= upper; }
  double half_width() const noexcept { return 0.5 * (upper - lower); }
};

struct WaldResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// OLS: sigma2_hat (X^T X)^{-1}.
/// OCR: sigma2_hat [G^{-1} - G^{-1} A^T (A G^{-1} A^T)^{-1} A G^{-1}], the
/// simplified form of sigma^2 Q G^{-1} Q^T. Zero when p = 2.
Matrix coef_covariance(const FittedModel& m);

/// RSS / residual_df, with residual_df = n - p (OLS) or n - p + 2 (OCR).
double sigma2_hat(const FittedModel& m);

double standard_error(const FittedModel& m, Eigen::Index j);

IntervalEstimate coef_ci(const FittedModel& m, Eigen::Index j, double level);

WaldResult wald_test(const FittedModel& m, Eigen::Index j);

/// x0^T (X^T X)^{-1} x0 for OLS; for OCR the constrained analogue, which
/// never exceeds the OLS value. Round-off negatives are clamped to zero.
double leverage(const FittedModel& m, const Vector& x0);

IntervalEstimate mean_response_ci(const FittedModel& m, const Vector& x0, double level);

IntervalEstimate prediction_interval(const FittedModel& m, const Vector& x0, double level);

/// Two-sided critical value t_{df, 1 - (1 - level)/2}.
double t_critical(double df, double level);

}  // namespace ocr
