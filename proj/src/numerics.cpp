#include "ocr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace ocr {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_length(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "vectors of length " + std::to_string(u.size()) + " and " +
                    std::to_string(v.size()));
  }
}

}  // namespace

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " contains non-finite entries");
  }
}

void require_finite(const Vector& v, std::string_view what) {
  if (!v.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " contains non-finite entries");
  }
}

void require_symmetric(const Matrix& m, std::string_view what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " is " + dims(m) + ", not square");
  }
  if (m.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " is empty");
  }
  require_finite(m, what);
  const double scale = m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " is not symmetric");
  }
}

Cholesky::Cholesky(const Matrix& m) {
  require_symmetric(m, "matrix");
  const Eigen::Index p = m.rows();
  const double max_diag = m.diagonal().maxCoeff();
  const double tol = static_cast<double>(p) * kEps * std::max(max_diag, 0.0);

  lower_ = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double pivot = m(j, j) - lower_.row(j).head(j).squaredNorm();
    if (!(pivot > tol)) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "pivot " + std::to_string(j) + " is " + std::to_string(pivot) +
                      " (threshold " + std::to_string(tol) + ")");
    }
    const double ljj = std::sqrt(pivot);
    lower_(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < p; ++i) {
      const double s = m(i, j) - lower_.row(i).head(j).dot(lower_.row(j).head(j));
      lower_(i, j) = s / ljj;
    }
  }
}

Cholesky Cholesky::from_lower(Matrix lower) {
  if (lower.rows() != lower.cols() || lower.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "Cholesky factor must be square and non-empty");
  }
  if ((lower.diagonal().array() <= 0.0).any()) {
    throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factor has a non-positive diagonal");
  }
  Cholesky c;
  c.lower_ = lower.triangularView<Eigen::Lower>();
  return c;
}

Vector Cholesky::solve(const Vector& b) const {
  if (b.size() != lower_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "right-hand side length does not match the factor");
  }
  Vector z = lower_.triangularView<Eigen::Lower>().solve(b);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(z);
}

Matrix Cholesky::solve(const Matrix& b) const {
  if (b.rows() != lower_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "right-hand side rows do not match the factor");
  }
  Matrix z = lower_.triangularView<Eigen::Lower>().solve(b);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(z);
}

Vector Cholesky::solve_lower(const Vector& b) const {
  if (b.size() != lower_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "right-hand side length does not match the factor");
  }
  return lower_.triangularView<Eigen::Lower>().solve(b);
}

Matrix Cholesky::inverse() const {
  Matrix inv = solve(Matrix(Matrix::Identity(size(), size())));
  return 0.5 * (inv + inv.transpose());
}

Vector solve_spd(const Matrix& m, const Vector& b) {
  return Cholesky(m).solve(b);
}

Vector solve_symmetric_indefinite(const Matrix& m, const Vector& b) {
  require_symmetric(m, "matrix");
  if (b.size() != m.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "right-hand side length does not match " + dims(m));
  }
  require_finite(b, "right-hand side");
  Eigen::FullPivLU<Matrix> lu(m);
  if (lu.rank() < m.rows()) {
    throw Error(ErrorCode::SingularSystem, "numerical rank " + std::to_string(lu.rank()) +
                                               " below dimension " + std::to_string(m.rows()));
  }
  Vector x = lu.solve(b);
  // one step of iterative refinement
  x += lu.solve(b - m * x);
  return x;
}

double min_eigenvalue_symmetric(const Matrix& m) {
  require_symmetric(m, "matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "symmetric eigenvalue iteration did not converge");
  }
  return es.eigenvalues().minCoeff();
}

double condition_number_spd(const Cholesky& chol) {
  Eigen::JacobiSVD<Matrix> svd(chol.lower());
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  const double ratio = s(0) / smin;
  return ratio * ratio;
}

double mean(const Vector& v) {
  if (v.size() == 0) {
    throw Error(ErrorCode::TooFewObservations, "mean of an empty vector");
  }
  return v.mean();
}

double sample_variance(const Vector& v) {
  return sample_covariance(v, v);
}

double sample_covariance(const Vector& u, const Vector& v) {
  require_same_length(u, v);
  if (u.size() < 2) {
    throw Error(ErrorCode::TooFewObservations, "need at least 2 observations, got " +
                                                   std::to_string(u.size()));
  }
  const double mu = u.mean();
  const double mv = v.mean();
  return (u.array() - mu).matrix().dot((v.array() - mv).matrix()) /
         static_cast<double>(u.size() - 1);
}

double sample_sd(const Vector& v) {
  return std::sqrt(sample_variance(v));
}

namespace {

Vector ranks(const Vector& v) {
  const auto n = static_cast<std::size_t>(v.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v(a) < v(b); });
  Vector r(v.size());
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v(order[j + 1]) == v(order[i])) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r(order[k]) = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman_correlation(const Vector& u, const Vector& v) {
  require_same_length(u, v);
  const Vector ru = ranks(u);
  const Vector rv = ranks(v);
  const double denom = std::sqrt(sample_variance(ru) * sample_variance(rv));
  if (denom == 0.0) return 0.0;
  return sample_covariance(ru, rv) / denom;
}

}  // namespace ocr
