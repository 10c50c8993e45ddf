#pragma once

#include "ocr/inference.hpp"

namespace ocr {

/// Slope of a simple (intercept-carrying) regression of a response on an
/// external variable w, with its naive t-based interval.
struct AssociationEstimate {
  double theta_hat = 0.0;
  double se = 0.0;
  IntervalEstimate ci;
  Eigen::Index n = 0;
};

/// theta_hat = Cov(response, w) / Var(w); se from the residual variance with
/// n - 2 degrees of freedom. Throws DegenerateRegressor when Var(w) = 0.
AssociationEstimate simple_regression(const Vector& response, const Vector& w,
                                      double level = 0.95);

/// Population slope of Yhat on W for a predictor with shrinkage factor eta,
/// given the true slope theta of Y on W.
inline double attenuation_prediction(double eta, double theta) {
  return eta * theta;
}

}  // namespace ocr
