#include "ocr/calibration.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace ocr {

CalibrationFit calibration_fit(const Vector& y, const Vector& yhat) {
  if (y.size() != yhat.size()) {
    throw Error(ErrorCode::DimensionMismatch, "y and yhat differ in length");
  }
  if (y.size() < 3) {
    throw Error(ErrorCode::TooFewObservations, "calibration fit needs n >= 3");
  }
  const double var_y = sample_variance(y);
  if (!(var_y > 0.0)) {
    throw Error(ErrorCode::DegenerateOutcome, "Var(y) = 0, calibration slope undefined");
  }
  CalibrationFit fit;
  fit.slope = sample_covariance(y, yhat) / var_y;
  fit.intercept = yhat.mean() - fit.slope * y.mean();
  return fit;
}

double shrinkage_factor(const PopulationMoments& pm) {
  if (pm.sigma_xy.size() != pm.sigma_xx.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "Sigma_XY length does not match Sigma_XX");
  }
  if (!(pm.sigma_y2 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sigma_Y^2 must be positive");
  }
  const Vector solved = solve_spd(pm.sigma_xx, pm.sigma_xy);
  return pm.sigma_xy.dot(solved) / pm.sigma_y2;
}

BinnedError binned_prediction_error(const Vector& y, const Vector& yhat, int bins) {
  if (y.size() != yhat.size()) {
    throw Error(ErrorCode::DimensionMismatch, "y and yhat differ in length");
  }
  if (bins < 1 || y.size() < bins) {
    throw Error(ErrorCode::TooFewObservations,
                "cannot split " + std::to_string(y.size()) + " observations into " +
                    std::to_string(bins) + " bins");
  }
  const auto n = static_cast<std::size_t>(y.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return y(a) < y(b); });

  BinnedError out;
  const auto nb = static_cast<std::size_t>(bins);
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t begin = b * n / nb;
    const std::size_t end = (b + 1) * n / nb;
    double sy = 0.0;
    double se = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      sy += y(order[k]);
      se += yhat(order[k]) - y(order[k]);
    }
    const auto count = static_cast<double>(end - begin);
    out.bin_center.push_back(sy / count);
    out.mean_error.push_back(se / count);
  }
  return out;
}

}  // namespace ocr
