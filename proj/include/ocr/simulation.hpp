#pragma once

// Seeded Monte Carlo studies comparing OLS and OCR.
//
// Replication i of a scenario draws from RandomSource(base_seed, i), so the
// records, and the aggregates computed from them in replication order, do
// not depend on how many worker threads ran the replications.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ocr/downstream.hpp"
#include "ocr/estimators.hpp"
#include "ocr/random.hpp"

namespace ocr {

enum class Study {
  Calibration,  // y = X beta + eps, in-sample MSE and calibration
  Downstream,   // (y, w) bivariate normal, X drawn independently
  Attenuation,  // y = X beta + eps and w = a y + noise, so W sees X only through Y
};

std::string_view study_name(Study s);
Study parse_study(std::string_view name);

struct ScenarioConfig {
  Eigen::Index n = 200;
  Eigen::Index p = 2;
  double sigma = 0.5;
  double theta = 0.5;
  double sigma_w = 1.0;
  std::size_t replications = 500;
  double level = 0.95;
  std::uint64_t base_seed = 1;
  Study study = Study::Calibration;
  /// Prepend an all-ones column to the p standard-normal predictors. The
  /// fitted models then carry p + 1 coefficients.
  bool intercept = true;

  void validate() const;
  /// Var(y) under the linear DGP: p * 0.5^2 + sigma^2.
  double outcome_variance() const;
  /// Population shrinkage factor of the least-squares predictor under the
  /// linear DGP: 0.25 p / (0.25 p + sigma^2).
  double population_eta() const;
};

/// Coefficient value shared by every predictor in the linear DGP.
inline constexpr double kTrueCoefficient = 0.5;
/// Multiplier of the nominal 95% Wald interval used for theta coverage.
inline constexpr double kWaldMultiplier = 1.96;

struct MethodMetrics {
  double mse = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double theta_hat = 0.0;
  double se_theta = 0.0;
  bool ci_covers = false;
};

struct ReplicationRecord {
  std::size_t replication_index = 0;
  MethodMetrics ols;
  MethodMetrics ocr;
  /// Slope of y itself on w (downstream and attenuation studies).
  double theta_direct = 0.0;
};

struct MethodAggregate {
  double mse_mean = 0.0, mse_sd = 0.0;
  double slope_mean = 0.0, slope_sd = 0.0;
  double intercept_mean = 0.0, intercept_sd = 0.0;
  // theta columns are NaN for the calibration study
  double theta_mean = 0.0, theta_sd = 0.0;
  double bias = 0.0;
  double bsr = 0.0;
  double coverage_pct = 0.0;
};

struct StudyReport {
  ScenarioConfig scenario;
  MethodAggregate ols;
  MethodAggregate ocr;
  double theta_direct_mean = 0.0;
  double theta_direct_sd = 0.0;
  std::vector<ReplicationRecord> records;  // sorted by replication_index

  const MethodAggregate& aggregate(Method m) const { return m == Method::OLS ? ols : ocr; }
};

/// Design with cfg.p standard-normal predictors (plus the intercept column
/// when cfg.intercept is set).
Matrix draw_design(const ScenarioConfig& cfg, RandomSource& rs);

/// y = Z beta + sigma eps with beta = (0.5, ..., 0.5) over the predictors Z.
Dataset dgp_linear(const ScenarioConfig& cfg, RandomSource& rs);

struct DownstreamDraw {
  Dataset data;
  Vector w;
};

DownstreamDraw dgp_downstream(const ScenarioConfig& cfg, RandomSource& rs);
DownstreamDraw dgp_attenuation(const ScenarioConfig& cfg, RandomSource& rs);

/// workers = 0 uses the hardware concurrency.
StudyReport run_calibration_study(const ScenarioConfig& cfg, unsigned workers = 1);
StudyReport run_downstream_study(const ScenarioConfig& cfg, unsigned workers = 1);
StudyReport run_attenuation_study(const ScenarioConfig& cfg, unsigned workers = 1);
/// Dispatches on cfg.study.
StudyReport run_study(const ScenarioConfig& cfg, unsigned workers = 1);

struct ScatterTable {
  Method method = Method::OLS;
  Vector y;
  Vector yhat;
  /// Least-squares line of yhat on y through the emitted points.
  CalibrationFit line;
};

ScatterTable emit_calibration_scatter(const FittedModel& m, const Dataset& d);

/// Scatter data for both methods on replication `replication` of a
/// calibration scenario.
std::vector<ScatterTable> representative_scatter(const ScenarioConfig& cfg,
                                                 std::size_t replication = 0);

/// Eight-cell factorial n in {200, 500}, p in {2, 5}, sigma in {0.5, 1.0}, in
/// the standard row order of the study reports.
std::vector<ScenarioConfig> factorial_grid(Study study, std::size_t replications,
                                           std::uint64_t seed);

}  // namespace ocr
