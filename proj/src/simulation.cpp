#include "ocr/simulation.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <thread>

namespace ocr {

namespace {

using ReplicationFn = std::function<ReplicationRecord(std::size_t)>;

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
};

Summary summarize(const std::vector<double>& v) {
  Summary s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

std::vector<ReplicationRecord> run_replications(std::size_t count, unsigned workers,
                                                const ReplicationFn& fn) {
  std::vector<ReplicationRecord> records(count);
  std::vector<std::exception_ptr> failures(count);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        records[i] = fn(i);
        records[i].replication_index = i;
      } catch (...) {
        failures[i] = std::current_exception();
        failed.store(true);
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // report the lowest failing index so the error does not depend on scheduling
  for (std::size_t i = 0; i < count; ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const Error& e) {
      throw ReplicationError(e.code(), i, e.what());
    } catch (const std::exception& e) {
      throw ReplicationError(ErrorCode::InternalConsistency, i, e.what());
    }
  }
  return records;
}

MethodAggregate aggregate(const std::vector<ReplicationRecord>& records, Method method,
                          bool with_theta, double theta) {
  std::vector<double> mse, slope, intercept, th;
  std::size_t covered = 0;
  for (const auto& r : records) {
    const MethodMetrics& m = method == Method::OLS ? r.ols : r.ocr;
    mse.push_back(m.mse);
    slope.push_back(m.slope);
    intercept.push_back(m.intercept);
    th.push_back(m.theta_hat);
    covered += m.ci_covers ? 1 : 0;
  }
  MethodAggregate a;
  const Summary s_mse = summarize(mse);
  const Summary s_slope = summarize(slope);
  const Summary s_int = summarize(intercept);
  a.mse_mean = s_mse.mean;
  a.mse_sd = s_mse.sd;
  a.slope_mean = s_slope.mean;
  a.slope_sd = s_slope.sd;
  a.intercept_mean = s_int.mean;
  a.intercept_sd = s_int.sd;
  if (with_theta) {
    const Summary s_th = summarize(th);
    a.theta_mean = s_th.mean;
    a.theta_sd = s_th.sd;
    a.bias = s_th.mean - theta;
    a.bsr = s_th.sd > 0.0 ? std::fabs(a.bias) / s_th.sd : std::numeric_limits<double>::infinity();
    a.coverage_pct = 100.0 * static_cast<double>(covered) / static_cast<double>(records.size());
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    a.theta_mean = a.theta_sd = a.bias = a.bsr = a.coverage_pct = nan;
  }
  return a;
}

MethodMetrics fit_metrics(const Dataset& d, Method method, const Vector* w, double theta,
                          double level) {
  const FittedModel m = fit(d, method);
  const Vector yhat = predict(m, d.X);
  MethodMetrics out;
  out.mse = (d.y - yhat).squaredNorm() / static_cast<double>(d.n());
  out.slope = m.calibration.slope;
  out.intercept = m.calibration.intercept;
  if (w != nullptr) {
    const AssociationEstimate a = simple_regression(yhat, *w, level);
    out.theta_hat = a.theta_hat;
    out.se_theta = a.se;
    out.ci_covers = std::fabs(a.theta_hat - theta) <= kWaldMultiplier * a.se;
  }
  return out;
}

StudyReport finish_report(const ScenarioConfig& cfg, std::vector<ReplicationRecord> records,
                          bool with_theta) {
  StudyReport report;
  report.scenario = cfg;
  report.ols = aggregate(records, Method::OLS, with_theta, cfg.theta);
  report.ocr = aggregate(records, Method::OCR, with_theta, cfg.theta);
  if (with_theta) {
    std::vector<double> direct;
    for (const auto& r : records) direct.push_back(r.theta_direct);
    const Summary s = summarize(direct);
    report.theta_direct_mean = s.mean;
    report.theta_direct_sd = s.sd;
  } else {
    report.theta_direct_mean = report.theta_direct_sd = std::numeric_limits<double>::quiet_NaN();
  }
  report.records = std::move(records);
  return report;
}

void require_study(const ScenarioConfig& cfg, Study expected) {
  cfg.validate();
  if (cfg.study != expected) {
    throw Error(ErrorCode::InvalidConfig, "scenario is a " + std::string(study_name(cfg.study)) +
                                              " study, expected " +
                                              std::string(study_name(expected)));
  }
}

StudyReport run_association_study(const ScenarioConfig& cfg, unsigned workers,
                                  DownstreamDraw (*draw)(const ScenarioConfig&, RandomSource&)) {
  auto records = run_replications(cfg.replications, workers, [&](std::size_t i) {
    RandomSource rs(cfg.base_seed, i);
    const DownstreamDraw dd = draw(cfg, rs);
    ReplicationRecord r;
    r.ols = fit_metrics(dd.data, Method::OLS, &dd.w, cfg.theta, cfg.level);
    r.ocr = fit_metrics(dd.data, Method::OCR, &dd.w, cfg.theta, cfg.level);
    r.theta_direct = simple_regression(dd.data.y, dd.w, cfg.level).theta_hat;
    return r;
  });
  return finish_report(cfg, std::move(records), true);
}

}  // namespace

std::string_view study_name(Study s) {
  switch (s) {
    case Study::Calibration: return "calibration";
    case Study::Downstream: return "downstream";
    case Study::Attenuation: return "attenuation";
  }
  return "unknown";
}

Study parse_study(std::string_view name) {
  if (name == "calibration") return Study::Calibration;
  if (name == "downstream") return Study::Downstream;
  if (name == "attenuation") return Study::Attenuation;
  throw Error(ErrorCode::InvalidConfig, "unknown study '" + std::string(name) + "'");
}

void ScenarioConfig::validate() const {
  const Eigen::Index columns = p + (intercept ? 1 : 0);
  if (p < 1 || columns < 2 || n <= columns) {
    throw Error(ErrorCode::InvalidConfig, "scenario needs more observations than coefficients (at least 2), got n = " +
                                              std::to_string(n) + ", p = " + std::to_string(p));
  }
  if (replications < 1) {
    throw Error(ErrorCode::InvalidConfig, "scenario needs at least one replication");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::InvalidConfig, "noise level sigma must be non-negative");
  }
  if (!(sigma_w > 0.0) || !std::isfinite(sigma_w) || !std::isfinite(theta)) {
    throw Error(ErrorCode::InvalidConfig, "sigma_w must be positive and theta finite");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "level must lie in (0, 1)");
  }
}

double ScenarioConfig::outcome_variance() const {
  return static_cast<double>(p) * kTrueCoefficient * kTrueCoefficient + sigma * sigma;
}

double ScenarioConfig::population_eta() const {
  const double signal = static_cast<double>(p) * kTrueCoefficient * kTrueCoefficient;
  return signal / (signal + sigma * sigma);
}

Matrix draw_design(const ScenarioConfig& cfg, RandomSource& rs) {
  Matrix Z = rs.standard_normal(cfg.n, cfg.p);
  if (!cfg.intercept) return Z;
  Matrix X(cfg.n, cfg.p + 1);
  X.col(0).setOnes();
  X.rightCols(cfg.p) = Z;
  return X;
}

Dataset dgp_linear(const ScenarioConfig& cfg, RandomSource& rs) {
  Matrix X = draw_design(cfg, rs);
  const Vector eps = rs.standard_normal(cfg.n);
  Vector y = X.rightCols(cfg.p) * Vector::Constant(cfg.p, kTrueCoefficient) + cfg.sigma * eps;
  return make_dataset(std::move(X), std::move(y), cfg.intercept);
}

DownstreamDraw dgp_downstream(const ScenarioConfig& cfg, RandomSource& rs) {
  const double var_y = cfg.outcome_variance();
  const double var_w = cfg.sigma_w * cfg.sigma_w;
  const double cov = cfg.theta * var_w;
  const double resid = var_y - cov * cov / var_w;  // Schur complement
  if (!(resid > 0.0)) {
    throw Error(ErrorCode::InvalidCovariance, "(y, w) covariance matrix is not positive definite");
  }
  Matrix X = draw_design(cfg, rs);
  Vector y(cfg.n);
  Vector w(cfg.n);
  const double sd_resid = std::sqrt(resid);
  for (Eigen::Index i = 0; i < cfg.n; ++i) {
    w(i) = cfg.sigma_w * rs.normal();
    y(i) = cfg.theta * w(i) + sd_resid * rs.normal();
  }
  return {make_dataset(std::move(X), std::move(y), cfg.intercept), std::move(w)};
}

DownstreamDraw dgp_attenuation(const ScenarioConfig& cfg, RandomSource& rs) {
  const double var_y = cfg.outcome_variance();
  const double var_w = cfg.sigma_w * cfg.sigma_w;
  // w = a y + s xi with Cov(y, w) / Var(w) = theta and Var(w) = sigma_w^2
  const double a = cfg.theta * var_w / var_y;
  const double s2 = var_w - a * a * var_y;
  if (!(s2 > 0.0)) {
    throw Error(ErrorCode::InvalidCovariance, "(y, w) covariance matrix is not positive definite");
  }
  Dataset d = dgp_linear(cfg, rs);
  const Vector xi = rs.standard_normal(cfg.n);
  Vector w = a * d.y + std::sqrt(s2) * xi;
  return {std::move(d), std::move(w)};
}

StudyReport run_calibration_study(const ScenarioConfig& cfg, unsigned workers) {
  require_study(cfg, Study::Calibration);
  auto records = run_replications(cfg.replications, workers, [&](std::size_t i) {
    RandomSource rs(cfg.base_seed, i);
    const Dataset d = dgp_linear(cfg, rs);
    ReplicationRecord r;
    r.ols = fit_metrics(d, Method::OLS, nullptr, cfg.theta, cfg.level);
    r.ocr = fit_metrics(d, Method::OCR, nullptr, cfg.theta, cfg.level);
    return r;
  });
  return finish_report(cfg, std::move(records), false);
}

StudyReport run_downstream_study(const ScenarioConfig& cfg, unsigned workers) {
  require_study(cfg, Study::Downstream);
  return run_association_study(cfg, workers, &dgp_downstream);
}

StudyReport run_attenuation_study(const ScenarioConfig& cfg, unsigned workers) {
  require_study(cfg, Study::Attenuation);
  return run_association_study(cfg, workers, &dgp_attenuation);
}

StudyReport run_study(const ScenarioConfig& cfg, unsigned workers) {
  switch (cfg.study) {
    case Study::Calibration: return run_calibration_study(cfg, workers);
    case Study::Downstream: return run_downstream_study(cfg, workers);
    case Study::Attenuation: return run_attenuation_study(cfg, workers);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown study");
}

ScatterTable emit_calibration_scatter(const FittedModel& m, const Dataset& d) {
  ScatterTable t;
  t.method = m.method;
  t.y = d.y;
  t.yhat = predict(m, d.X);
  t.line = calibration_fit(t.y, t.yhat);
  return t;
}

std::vector<ScatterTable> representative_scatter(const ScenarioConfig& cfg,
                                                 std::size_t replication) {
  cfg.validate();
  RandomSource rs(cfg.base_seed, replication);
  const Dataset d = dgp_linear(cfg, rs);
  return {emit_calibration_scatter(fit_ols(d), d), emit_calibration_scatter(fit_ocr(d), d)};
}

std::vector<ScenarioConfig> factorial_grid(Study study, std::size_t replications,
                                           std::uint64_t seed) {
  std::vector<ScenarioConfig> grid;
  for (double sigma : {0.5, 1.0}) {
    for (Eigen::Index p : {2, 5}) {
      for (Eigen::Index n : {200, 500}) {
        ScenarioConfig c;
        c.n = n;
        c.p = p;
        c.sigma = sigma;
        c.replications = replications;
        c.base_seed = seed;
        c.study = study;
        grid.push_back(c);
      }
    }
  }
  return grid;
}

}  // namespace ocr
