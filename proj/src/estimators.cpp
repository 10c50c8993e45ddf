#include "ocr/estimators.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ocr {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Row-normalized copy of the constraints. Scaling the rows of A and c by a
// diagonal D leaves the feasible set, P = K A and the correction K (A b - c)
// unchanged, while keeping the 2 x 2 constraint Gram well scaled: row 1
// grows with n * Var(y), row 2 does not.
struct ScaledConstraints {
  Matrix A;
  Vector c;
  Vector row_scale;  // D
};

ScaledConstraints scale_rows(const ConstraintSystem& cs) {
  ScaledConstraints s{cs.A, cs.c, Vector(cs.A.rows())};
  for (Eigen::Index i = 0; i < cs.A.rows(); ++i) {
    const double norm = cs.A.row(i).norm();
    if (!(norm > 0.0)) {
      throw Error(ErrorCode::RankDeficientConstraints, "constraint row " + std::to_string(i + 1) +
                                                           " is zero");
    }
    s.row_scale(i) = 1.0 / norm;
    s.A.row(i) *= s.row_scale(i);
    s.c(i) *= s.row_scale(i);
  }
  return s;
}

void require_constraint_shape(Eigen::Index p, const ConstraintSystem& cs) {
  if (cs.A.rows() != 2 || cs.A.cols() != p || cs.c.size() != 2) {
    throw Error(ErrorCode::DimensionMismatch, "constraint system must be 2 x " + std::to_string(p));
  }
}

// G^{-1} A'^T and the constraint Gram A' G^{-1} A'^T for row-scaled A'.
struct ConstraintGram {
  Matrix Z;
  Cholesky S;
};

ConstraintGram constraint_gram(const Cholesky& gram, const Matrix& scaled_A) {
  Matrix Z = gram.solve(Matrix(scaled_A.transpose()));
  Matrix S = scaled_A * Z;
  S = 0.5 * (S + S.transpose());
  try {
    return {std::move(Z), Cholesky(S)};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotPositiveDefinite) {
      throw Error(ErrorCode::SingularConstraintGram, "A (X^T X)^{-1} A^T is singular");
    }
    throw;
  }
}

struct DesignFactor {
  Matrix xtx;
  Matrix lower;  // L with L L^T = X^T X, positive diagonal
  Vector qty;    // leading p entries of Q^T y, so that R beta_ols = qty
  Vector beta_ols;
};

// Householder QR of X gives R with R^T R = X^T X without forming the
// squared-condition normal equations; the least-squares solution comes from
// the same factorization.
DesignFactor factor_design(const Dataset& d) {
  const Eigen::Index p = d.p();
  DesignFactor f;
  f.xtx = d.X.transpose() * d.X;
  f.xtx = 0.5 * (f.xtx + f.xtx.transpose());

  Eigen::HouseholderQR<Matrix> qr(d.X);
  Matrix R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  Vector qty = (qr.householderQ().transpose() * d.y).head(p);

  const double max_diag = f.xtx.diagonal().maxCoeff();
  const double tol = static_cast<double>(p) * kEps * max_diag;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double pivot = R(j, j) * R(j, j);
    if (!(pivot > tol)) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "X^T X is singular to working precision (column " + std::to_string(j + 1) +
                      " is collinear with earlier columns)");
    }
    if (R(j, j) < 0.0) {
      R.row(j) *= -1.0;
      qty(j) *= -1.0;
    }
  }
  f.beta_ols = R.triangularView<Eigen::Upper>().solve(qty);
  f.lower = R.transpose();
  f.qty = std::move(qty);
  return f;
}

void finish_fit(const Dataset& d, FittedModel& m) {
  const Vector fitted = d.X * m.beta;
  m.rss = (d.y - fitted).squaredNorm();
  if (m.residual_df <= 0) {
    throw Error(ErrorCode::DegenerateDf, "residual degrees of freedom " +
                                             std::to_string(m.residual_df));
  }
  m.sigma2_hat = m.rss / static_cast<double>(m.residual_df);
  m.calibration = calibration_fit(d.y, fitted);
  m.n = d.n();
  m.p = d.p();
  m.has_intercept_column = d.has_intercept_column;
  m.column_names = d.column_names;
}

}  // namespace

std::string_view method_name(Method m) {
  return m == Method::OLS ? "ols" : "ocr";
}

Method parse_method(std::string_view name) {
  if (name == "ols" || name == "OLS") return Method::OLS;
  if (name == "ocr" || name == "OCR") return Method::OCR;
  throw Error(ErrorCode::InvalidConfig, "unknown method '" + std::string(name) +
                                            "' (expected ols or ocr)");
}

void Dataset::validate() const {
  if (y.size() != X.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "X has " + std::to_string(X.rows()) +
                                                  " rows but y has " + std::to_string(y.size()));
  }
  if (X.cols() < 2) {
    throw Error(ErrorCode::InvalidArgument, "need p >= 2 predictors, got " +
                                                std::to_string(X.cols()));
  }
  if (X.rows() <= X.cols()) {
    throw Error(ErrorCode::TooFewObservations, "need n > p, got n = " + std::to_string(X.rows()) +
                                                   ", p = " + std::to_string(X.cols()));
  }
  require_finite(X, "X");
  require_finite(y, "y");
  if (has_intercept_column && (X.col(0).array() != 1.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "intercept column is not all ones");
  }
  if (!column_names.empty() && column_names.size() != static_cast<std::size_t>(X.cols())) {
    throw Error(ErrorCode::DimensionMismatch, "column name count does not match p");
  }
  const double ybar = y.mean();
  if (!(sample_variance(y) > 1e-12 * (ybar * ybar + 1.0))) {
    throw Error(ErrorCode::DegenerateOutcome, "outcome has (numerically) zero variance");
  }
}

Dataset make_dataset(Matrix X, Vector y, bool has_intercept_column,
                     std::vector<std::string> column_names) {
  Dataset d{std::move(X), std::move(y), has_intercept_column, std::move(column_names)};
  if (d.column_names.empty()) {
    for (Eigen::Index j = 0; j < d.X.cols(); ++j) {
      d.column_names.push_back(j == 0 && has_intercept_column ? "intercept"
                                                               : "x" + std::to_string(j + 1));
    }
  }
  d.validate();
  return d;
}

double ConstraintSystem::violation(const Vector& beta) const {
  return (A * beta - c).cwiseAbs().maxCoeff();
}

ConstraintSystem build_constraints(const Dataset& d) {
  d.validate();
  const double n = static_cast<double>(d.n());
  const double ybar = d.y.mean();
  const Vector yc = d.y.array() - ybar;

  ConstraintSystem cs{Matrix(2, d.p()), Vector(2)};
  cs.A.row(0) = yc.transpose() * d.X;
  cs.A.row(1) = d.X.colwise().sum() / n;
  cs.c(0) = yc.dot(d.y);
  cs.c(1) = ybar;

  // A row that vanishes relative to the size of its ingredients is round-off;
  // normalizing it would manufacture a spurious second direction.
  const double x_norm = d.X.norm();
  const double row_ref[2] = {yc.norm() * x_norm, x_norm / std::sqrt(n)};
  for (Eigen::Index i = 0; i < 2; ++i) {
    if (!(cs.A.row(i).norm() > 1e-10 * row_ref[i])) {
      throw Error(ErrorCode::RankDeficientConstraints,
                  "calibration constraint row " + std::to_string(i + 1) + " vanishes");
    }
  }

  const ScaledConstraints s = scale_rows(cs);
  Eigen::JacobiSVD<Matrix> svd(s.A);
  const auto& sv = svd.singularValues();
  if (!(sv(1) > 1e-10 * sv(0))) {
    throw Error(ErrorCode::RankDeficientConstraints,
                "calibration constraints are linearly dependent (rank(A) < 2)");
  }
  return cs;
}

Matrix correction_matrix(const Cholesky& gram, const ConstraintSystem& cs) {
  require_constraint_shape(gram.size(), cs);
  const ScaledConstraints s = scale_rows(cs);
  const ConstraintGram cg = constraint_gram(gram, s.A);
  // K = Z S^{-1} D
  Matrix K = cg.Z * cg.S.solve(Matrix(Matrix::Identity(2, 2)));
  return K * s.row_scale.asDiagonal();
}

Matrix correction_matrix(const Matrix& xtx, const ConstraintSystem& cs) {
  return correction_matrix(Cholesky(xtx), cs);
}

Projections projection_operators(const Matrix& xtx, const ConstraintSystem& cs) {
  const Matrix K = correction_matrix(xtx, cs);
  Projections out;
  out.P = K * cs.A;
  out.Q = Matrix::Identity(xtx.rows(), xtx.cols()) - out.P;
  return out;
}

Matrix constrained_inverse_gram(const Cholesky& gram, const ConstraintSystem& cs) {
  require_constraint_shape(gram.size(), cs);
  const ScaledConstraints s = scale_rows(cs);
  const ConstraintGram cg = constraint_gram(gram, s.A);
  Matrix M = gram.inverse() - cg.Z * cg.S.solve(Matrix(cg.Z.transpose()));
  return 0.5 * (M + M.transpose());
}

FittedModel fit_ols(const Dataset& d) {
  d.validate();
  DesignFactor f = factor_design(d);

  FittedModel m;
  m.method = Method::OLS;
  m.beta = std::move(f.beta_ols);
  m.xtx = std::move(f.xtx);
  m.gram_factor = std::move(f.lower);
  m.residual_df = d.n() - d.p();
  const Cholesky gram = m.gram();
  m.gram_condition = condition_number_spd(gram);
  finish_fit(d, m);
  m.coef_cov = m.sigma2_hat * gram.inverse();
  return m;
}

FittedModel fit_ocr(const Dataset& d) {
  ConstraintSystem cs = build_constraints(d);
  DesignFactor f = factor_design(d);
  const Eigen::Index p = d.p();
  const double n = static_cast<double>(d.n());

  FittedModel m;
  m.method = Method::OCR;
  m.xtx = std::move(f.xtx);
  m.gram_factor = std::move(f.lower);
  const Cholesky gram = m.gram();
  m.gram_condition = condition_number_spd(gram);
  const Vector xty = d.X.transpose() * d.y;

  if (p == 2) {
    // two constraints, two unknowns: the feasible set is a single point
    Eigen::FullPivLU<Matrix> lu(cs.A);
    m.beta = lu.solve(cs.c);
    m.multiplier = cs.A.transpose().fullPivLu().solve((xty - m.xtx * m.beta) / n);
  } else if (m.gram_condition > kKktFallbackCondition) {
    // Saddle-point system in the rotated coordinates gamma = R beta, where
    // ||y - X beta||^2 = ||Q^T y - gamma||^2 + const. The block R^T R never
    // appears, so accuracy degrades with cond(X) rather than cond(X^T X).
    const ScaledConstraints s = scale_rows(cs);
    const Matrix B = gram.lower().triangularView<Eigen::Lower>().solve(s.A.transpose()).transpose();
    const ScaledConstraints r = scale_rows(ConstraintSystem{B, s.c});
    Matrix kkt = Matrix::Zero(p + 2, p + 2);
    kkt.topLeftCorner(p, p) = Matrix::Identity(p, p) / n;
    kkt.topRightCorner(p, 2) = r.A.transpose();
    kkt.bottomLeftCorner(2, p) = r.A;
    Vector rhs(p + 2);
    rhs.head(p) = f.qty / n;
    rhs.tail(2) = r.c;
    const Vector sol = solve_symmetric_indefinite(kkt, rhs);
    m.beta = gram.lower().transpose().triangularView<Eigen::Upper>().solve(sol.head(p));
    m.multiplier = s.row_scale.cwiseProduct(r.row_scale).cwiseProduct(sol.tail(2));
    m.used_kkt_fallback = true;
  } else {
    const ScaledConstraints s = scale_rows(cs);
    const ConstraintGram cg = constraint_gram(gram, s.A);
    const Vector scaled_violation = s.A * f.beta_ols - s.c;
    const Vector weights = cg.S.solve(scaled_violation);
    m.beta = f.beta_ols - cg.Z * weights;
    m.multiplier = s.row_scale.asDiagonal() * weights / n;
  }

  m.residual_df = d.n() - p + 2;
  finish_fit(d, m);
  if (p == 2) {
    m.coef_cov = Matrix::Zero(p, p);
  } else {
    m.coef_cov = m.sigma2_hat * constrained_inverse_gram(gram, cs);
  }
  m.constraint = std::move(cs);
  return m;
}

FittedModel fit(const Dataset& d, Method method) {
  return method == Method::OLS ? fit_ols(d) : fit_ocr(d);
}

Vector predict(const FittedModel& m, const Matrix& X_new) {
  if (X_new.cols() != m.beta.size()) {
    throw Error(ErrorCode::DimensionMismatch, "new data has " + std::to_string(X_new.cols()) +
                                                  " columns, model has p = " +
                                                  std::to_string(m.beta.size()));
  }
  return X_new * m.beta;
}

}  // namespace ocr
