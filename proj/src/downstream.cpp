#include "ocr/downstream.hpp"

#include <cmath>
#include <string>

namespace ocr {

AssociationEstimate simple_regression(const Vector& response, const Vector& w, double level) {
  if (response.size() != w.size()) {
    throw Error(ErrorCode::DimensionMismatch, "response and w differ in length");
  }
  const Eigen::Index n = w.size();
  if (n < 3) {
    throw Error(ErrorCode::TooFewObservations, "simple regression needs n >= 3, got " +
                                                   std::to_string(n));
  }
  const Vector wc = w.array() - w.mean();
  const Vector rc = response.array() - response.mean();
  const double sww = wc.squaredNorm();
  if (!(sww > 0.0)) {
    throw Error(ErrorCode::DegenerateRegressor, "external variable has zero variance");
  }

  AssociationEstimate est;
  est.n = n;
  est.theta_hat = wc.dot(rc) / sww;
  const double rss = (rc - est.theta_hat * wc).squaredNorm();
  const double df = static_cast<double>(n - 2);
  est.se = std::sqrt(rss / df / sww);
  const double half = t_critical(df, level) * est.se;
  est.ci = {est.theta_hat, est.theta_hat - half, est.theta_hat + half, level};
  return est;
}

}  // namespace ocr
