#include "ocr/inference.hpp"

#include <cmath>
#include <string>

#include "ocr/distributions.hpp"

namespace ocr {

namespace {

void require_index(const FittedModel& m, Eigen::Index j) {
  if (j < 0 || j >= m.beta.size()) {
    throw Error(ErrorCode::InvalidArgument, "coefficient index " + std::to_string(j) +
                                                " out of range for p = " +
                                                std::to_string(m.beta.size()));
  }
}

void require_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidProbability, "confidence level must lie in (0, 1), got " +
                                                   std::to_string(level));
  }
}

double df_of(const FittedModel& m) {
  if (m.residual_df <= 0) {
    throw Error(ErrorCode::DegenerateDf, "residual degrees of freedom " +
                                             std::to_string(m.residual_df));
  }
  return static_cast<double>(m.residual_df);
}

IntervalEstimate symmetric_interval(double point, double half_width, double level) {
  return {point, point - half_width, point + half_width, level};
}

}  // namespace

double t_critical(double df, double level) {
  require_level(level);
  return t_quantile(df, 1.0 - (1.0 - level) / 2.0);
}

Matrix coef_covariance(const FittedModel& m) {
  const double s2 = sigma2_hat(m);
  const Cholesky gram = m.gram();
  if (m.method == Method::OLS) {
    return s2 * gram.inverse();
  }
  if (!m.constraint) {
    throw Error(ErrorCode::InvalidArgument, "OCR model without a constraint system");
  }
  if (m.p == 2) {
    return Matrix::Zero(2, 2);
  }
  return s2 * constrained_inverse_gram(gram, *m.constraint);
}

double sigma2_hat(const FittedModel& m) {
  return m.rss / df_of(m);
}

double standard_error(const FittedModel& m, Eigen::Index j) {
  require_index(m, j);
  return std::sqrt(std::max(m.coef_cov(j, j), 0.0));
}

IntervalEstimate coef_ci(const FittedModel& m, Eigen::Index j, double level) {
  require_index(m, j);
  const double t = t_critical(df_of(m), level);
  return symmetric_interval(m.beta(j), t * standard_error(m, j), level);
}

WaldResult wald_test(const FittedModel& m, Eigen::Index j) {
  const double se = standard_error(m, j);
  if (!(se > 0.0)) {
    throw Error(ErrorCode::ZeroStandardError, "coefficient " + std::to_string(j) +
                                                  " has zero standard error");
  }
  WaldResult r;
  r.df = df_of(m);
  r.statistic = m.beta(j) / se;
  r.p_value = t_two_sided_p_value(r.statistic, r.df);
  return r;
}

double leverage(const FittedModel& m, const Vector& x0) {
  if (x0.size() != m.beta.size()) {
    throw Error(ErrorCode::DimensionMismatch, "x0 has length " + std::to_string(x0.size()) +
                                                  ", model has p = " +
                                                  std::to_string(m.beta.size()));
  }
  require_finite(x0, "x0");
  const Cholesky gram = m.gram();
  // h_OLS = ||L^{-1} x0||^2
  const Vector z = gram.solve_lower(x0);
  const double h_ols = z.squaredNorm();
  if (m.method == Method::OLS) return h_ols;
  if (!m.constraint) {
    throw Error(ErrorCode::InvalidArgument, "OCR model without a constraint system");
  }
  if (m.p == 2) return 0.0;

  // h_OCR = h_OLS - u^T S^{-1} u with u = A G^{-1} x0 and S = A G^{-1} A^T,
  // both built from row-normalized A.
  Matrix A = m.constraint->A;
  for (Eigen::Index i = 0; i < A.rows(); ++i) A.row(i) /= A.row(i).norm();
  const Matrix W = gram.lower().triangularView<Eigen::Lower>().solve(Matrix(A.transpose()));
  const Vector u = W.transpose() * z;
  const Matrix S = W.transpose() * W;
  const double h = h_ols - u.dot(Cholesky(S).solve(u));
  const double tol = 1e-10 * std::max(1.0, h_ols);
  if (h < -tol) {
    throw Error(ErrorCode::InternalConsistency, "negative OCR leverage " + std::to_string(h));
  }
  return std::max(h, 0.0);
}

IntervalEstimate mean_response_ci(const FittedModel& m, const Vector& x0, double level) {
  const double h = leverage(m, x0);
  const double t = t_critical(df_of(m), level);
  const double point = x0.dot(m.beta);
  return symmetric_interval(point, t * std::sqrt(m.sigma2_hat * h), level);
}

IntervalEstimate prediction_interval(const FittedModel& m, const Vector& x0, double level) {
  const double h = leverage(m, x0);
  const double t = t_critical(df_of(m), level);
  const double point = x0.dot(m.beta);
  return symmetric_interval(point, t * std::sqrt(m.sigma2_hat * (1.0 + h)), level);
}

}  // namespace ocr
