#pragma once

namespace ocr {

/// Regularized incomplete beta function I_x(a, b) for a, b > 0, x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

/// Student t cumulative distribution function with df > 0 degrees of freedom.
double t_cdf(double t, double df);

/// Quantile of the Student t distribution, found by bracketing and bisecting
/// the incomplete-beta form of the CDF. Throws InvalidProbability unless
/// 0 < prob < 1.
double t_quantile(double df, double prob);

/// Two-sided p-value 2 * (1 - F_t(|t|; df)).
double t_two_sided_p_value(double t, double df);

}  // namespace ocr
