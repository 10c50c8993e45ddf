#include "ocr/distributions.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ocr/errors.hpp"

namespace ocr {

namespace {

constexpr int kMaxIterations = 20000;
constexpr double kTiny = 1e-300;
constexpr double kCfEps = 1e-16;

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kCfEps) return h;
  }
  throw Error(ErrorCode::NoConvergence, "incomplete beta continued fraction (a=" +
                                            std::to_string(a) + ", b=" + std::to_string(b) + ")");
}

// I_x(a, b) with the complement 1 - x supplied separately so callers can
// avoid cancellation when x is close to 1.
double incomplete_beta(double a, double b, double x, double xc) {
  if (x <= 0.0) return 0.0;
  if (xc <= 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log(xc);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, xc) / b;
}

// P(T > t) for t >= 0.
double t_upper_tail(double t, double df) {
  const double t2 = t * t;
  const double x = df / (df + t2);
  const double xc = t2 / (df + t2);
  return 0.5 * incomplete_beta(0.5 * df, 0.5, x, xc);
}

void require_df(double df) {
  if (!(df > 0.0) || !std::isfinite(df)) {
    throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be positive, got " +
                                                std::to_string(df));
  }
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "incomplete beta needs a, b > 0");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "incomplete beta needs x in [0, 1]");
  }
  return incomplete_beta(a, b, x, 1.0 - x);
}

double t_cdf(double t, double df) {
  require_df(df);
  if (std::isnan(t)) {
    throw Error(ErrorCode::InvalidArgument, "t_cdf of NaN");
  }
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = t_upper_tail(std::fabs(t), df);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double t_two_sided_p_value(double t, double df) {
  require_df(df);
  if (std::isinf(t)) return 0.0;
  const double p = 2.0 * t_upper_tail(std::fabs(t), df);
  return p > 1.0 ? 1.0 : p;
}

double t_quantile(double df, double prob) {
  require_df(df);
  if (!(prob > 0.0 && prob < 1.0)) {
    throw Error(ErrorCode::InvalidProbability, "probability must lie in (0, 1), got " +
                                                   std::to_string(prob));
  }
  if (prob == 0.5) return 0.0;
  const double sign = prob > 0.5 ? 1.0 : -1.0;
  // target upper-tail mass for the positive quantile
  const double tail = prob > 0.5 ? 1.0 - prob : prob;

  double lo = 0.0;
  double hi = 1.0;
  while (t_upper_tail(hi, df) > tail) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) {
      throw Error(ErrorCode::NoConvergence, "t quantile bracket overflow");
    }
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (t_upper_tail(mid, df) > tail) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return sign * 0.5 * (lo + hi);
}

}  // namespace ocr
