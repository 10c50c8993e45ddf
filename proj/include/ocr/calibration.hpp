#pragma once

#include <vector>

#include "ocr/numerics.hpp"

namespace ocr {

/// Least-squares regression of fitted values on observed outcomes,
/// yhat_i = intercept + slope * y_i. Perfect calibration is (1, 0).
struct CalibrationFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Population first and second moments of (X, Y).
struct PopulationMoments {
  Vector mu_x;
  Matrix sigma_xx;
  Vector sigma_xy;
  double mu_y = 0.0;
  double sigma_y2 = 1.0;
};

/// slope = Cov(y, yhat) / Var(y), intercept = mean(yhat) - slope * mean(y).
/// The calibration regression always carries its own intercept.
CalibrationFit calibration_fit(const Vector& y, const Vector& yhat);

/// Sigma_XY^T Sigma_XX^{-1} Sigma_XY / sigma_Y^2: the factor by which the
/// population least-squares predictor contracts toward the outcome mean.
double shrinkage_factor(const PopulationMoments& pm);

/// E(Yhat - Y | Y = y) for a predictor with shrinkage factor eta.
inline double conditional_bias(double eta, double mu_y, double y) {
  return (eta - 1.0) * (y - mu_y);
}

/// Prediction error (yhat - y) averaged within equal-count bins of y.
struct BinnedError {
  std::vector<double> bin_center;  // mean of y within the bin
  std::vector<double> mean_error;
};

/// Sorts by y and splits into `bins` equal-count groups (the last groups
/// absorb the remainder). Used for the regression-to-the-mean diagnostic.
BinnedError binned_prediction_error(const Vector& y, const Vector& yhat, int bins = 5);

}  // namespace ocr
