// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "ocr/estimators.hpp"
#include "ocr/inference.hpp"
#include "ocr/numerics.hpp"
#include "ocr/simulation.hpp"

using namespace ocr;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [" << what << "]";
    }
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

// Random design: n in [20, 500], p in [2, 10] columns, sigma in [0.1, 2];
// half of the designs carry an intercept column.
struct RandomCase {
  Dataset data;
  double sigma;
};

RandomCase random_case(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> n_dist(20, 500), p_dist(2, 10), coin(0, 1);
  std::uniform_real_distribution<double> s_dist(0.1, 2.0);
  const Eigen::Index n = n_dist(gen);
  const Eigen::Index p = p_dist(gen);
  const double sigma = s_dist(gen);
  auto in = oracle::random_instance(gen, n, p, sigma);
  const bool intercept = coin(gen) == 1;
  if (intercept) in.X.col(0).setOnes();
  return {make_dataset(in.X, in.y, intercept), sigma};
}

// AC1: constraint satisfaction and perfect in-sample calibration.
Outcome ac1() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 gen(101);
  double worst_constraint = 0.0, worst_slope = 0.0, worst_intercept = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const RandomCase rc = random_case(gen);
    const FittedModel m = fit_ocr(rc.data);
    const auto k = oracle::calibration_constraints(rc.data.X, rc.data.y);
    const double resid = (k.A * m.beta - k.c).lpNorm<Eigen::Infinity>();
    worst_constraint = std::max(worst_constraint, resid / (1.0 + k.c.lpNorm<Eigen::Infinity>()));
    worst_slope = std::max(worst_slope, std::fabs(m.calibration.slope - 1.0));
    worst_intercept = std::max(worst_intercept, std::fabs(m.calibration.intercept));
  }
  const double elapsed = seconds_since(t0);
  o.require(worst_constraint <= 1e-8, "constraint residual");
  o.require(worst_slope <= 1e-8, "calibration slope");
  o.require(worst_intercept <= 1e-8, "calibration intercept");
  o.require(elapsed < 30.0, "runtime");
  o.detail << " 1000 fits: max rel constraint residual " << sci(worst_constraint)
           << ", max |slope-1| " << sci(worst_slope) << ", max |intercept| "
           << sci(worst_intercept) << ", " << fmt(elapsed, 2) << " s";
  return o;
}

// AC2: agreement with an independent null-space solver.
Outcome ac2() {
  Outcome o;
  std::mt19937_64 gen(202);
  std::uniform_int_distribution<int> n_dist(20, 500), p_dist(3, 10);
  std::uniform_real_distribution<double> log_cond(2.0, 8.0);
  double worst = 0.0;
  int kkt = 0;
  for (int i = 0; i < 200; ++i) {
    oracle::Instance in;
    const Eigen::Index n = n_dist(gen);
    if (i < 50) {
      in = oracle::random_instance(gen, n, 2, 0.7);
    } else if (i < 140) {
      in = oracle::random_instance(gen, n, p_dist(gen), 0.7);
    } else {
      in = oracle::collinear_instance(gen, n, p_dist(gen), std::pow(10.0, log_cond(gen)), 0.7);
    }
    const FittedModel m = fit_ocr(make_dataset(in.X, in.y));
    if (m.used_kkt_fallback) ++kkt;
    const auto k = oracle::calibration_constraints(in.X, in.y);
    const Vector ref = oracle::nullspace_constrained_ls(in.X, in.y, k.A, k.c);
    worst = std::max(worst, oracle::relative_error(m.beta, ref));
  }
  o.require(worst <= 1e-8, "relative error");
  o.detail << " 200 instances (50 with p = 2, 60 with cond(X^T X) in [1e2, 1e8]): max rel error "
           << sci(worst) << ", KKT fallbacks " << kkt;
  return o;
}

// AC3: calibration study grid.
Outcome ac3() {
  Outcome o;
  const auto t0 = Clock::now();
  const double ols_slope[8] = {0.666, 0.669, 0.837, 0.835, 0.341, 0.335, 0.564, 0.558};
  const double ols_mse[8] = {0.247, 0.248, 0.243, 0.246, 0.978, 0.994, 0.970, 0.992};
  const double ocr_mse[8] = {0.374, 0.372, 0.291, 0.295, 2.956, 3.011, 1.739, 1.787};
  const auto grid = factorial_grid(Study::Calibration, 200, 20260101);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const StudyReport r = run_study(grid[k], 4);
    const auto& s = r.scenario;
    const std::string cell = "n=" + std::to_string(s.n) + ",p=" + std::to_string(s.p) +
                             ",sigma=" + fmt(s.sigma, 1);
    o.require(std::fabs(r.ols.slope_mean - ols_slope[k]) <= 0.03, cell + " OLS slope");
    o.require(std::fabs(r.ols.mse_mean / ols_mse[k] - 1.0) <= 0.07, cell + " OLS MSE");
    o.require(std::fabs(r.ocr.mse_mean / ocr_mse[k] - 1.0) <= 0.15, cell + " OCR MSE");
    o.require(std::fabs(r.ocr.slope_mean - 1.0) <= 1e-8, cell + " OCR slope");
    o.detail << ' ' << cell << ": OLS slope " << fmt(r.ols.slope_mean, 3) << " mse "
             << fmt(r.ols.mse_mean, 3) << ", OCR mse " << fmt(r.ocr.mse_mean, 3) << ';';
  }
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 120.0, "runtime");
  o.detail << ' ' << fmt(elapsed, 2) << " s";
  return o;
}

// AC4: downstream association study grid.
Outcome ac4() {
  Outcome o;
  const auto t0 = Clock::now();
  const double ols_theta[8] = {0.005, 0.002, 0.012, 0.005, 0.004, 0.002, 0.013, 0.005};
  const auto grid = factorial_grid(Study::Downstream, 200, 20260101);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const StudyReport r = run_study(grid[k], 4);
    const auto& s = r.scenario;
    const std::string cell = "n=" + std::to_string(s.n) + ",p=" + std::to_string(s.p) +
                             ",sigma=" + fmt(s.sigma, 1);
    o.require(std::fabs(r.ols.theta_mean - ols_theta[k]) <= 0.02, cell + " OLS theta");
    o.require(r.ols.coverage_pct < 5.0, cell + " OLS coverage");
    o.require(r.ols.bsr > 10.0, cell + " OLS BSR");
    o.require(std::fabs(r.ocr.bias) < 0.3, cell + " OCR bias");
    o.require(r.ocr.coverage_pct >= 90.0 && r.ocr.coverage_pct <= 100.0, cell + " OCR coverage");
    o.detail << ' ' << cell << ": OLS theta " << fmt(r.ols.theta_mean, 3) << " cov "
             << fmt(r.ols.coverage_pct, 1) << " bsr " << fmt(r.ols.bsr, 1) << ", OCR bias "
             << fmt(r.ocr.bias, 3) << " cov " << fmt(r.ocr.coverage_pct, 1) << ';';
  }
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 180.0, "runtime");
  o.detail << ' ' << fmt(elapsed, 2) << " s";
  return o;
}

// AC5: attenuation of the association by the shrinkage factor.
Outcome ac5() {
  Outcome o;
  const auto grid = factorial_grid(Study::Attenuation, 500, 20260101);
  for (const auto& s : grid) {
    const StudyReport r = run_study(s, 4);
    const std::string cell = "n=" + std::to_string(s.n) + ",p=" + std::to_string(s.p) +
                             ",sigma=" + fmt(s.sigma, 1);
    const double ratio = r.ols.theta_mean / r.theta_direct_mean;
    const double eta = s.population_eta();
    o.require(std::fabs(ratio - eta) <= 0.05, cell + " OLS ratio");
    o.require(std::fabs(r.ocr.theta_mean - r.theta_direct_mean) <= 0.05 * s.theta,
              cell + " OCR vs direct");
    o.detail << ' ' << cell << ": ratio " << fmt(ratio, 3) << " (eta " << fmt(eta, 3)
             << "), OCR " << fmt(r.ocr.theta_mean, 3) << " direct "
             << fmt(r.theta_direct_mean, 3) << ';';
  }
  return o;
}

struct CoverageCounts {
  double coef = 0.0, mean = 0.0, pred = 0.0;
};

// Coverage of the nominal 95% intervals at n = 200, 5 predictors, sigma = 0.5.
CoverageCounts interval_coverage(Method method, int reps) {
  ScenarioConfig cfg;
  cfg.n = 200;
  cfg.p = 5;
  cfg.sigma = 0.5;
  cfg.base_seed = 606;
  Vector beta = Vector::Constant(cfg.p + 1, kTrueCoefficient);
  beta(0) = 0.0;
  long coef_hits = 0, mean_hits = 0, pred_hits = 0, coef_total = 0;
  for (int r = 0; r < reps; ++r) {
    RandomSource rs(cfg.base_seed, static_cast<std::uint64_t>(r));
    const Dataset d = dgp_linear(cfg, rs);
    const FittedModel m = fit(d, method);
    for (Eigen::Index j = 0; j < m.p; ++j) {
      coef_hits += coef_ci(m, j, 0.95).contains(beta(j)) ? 1 : 0;
      ++coef_total;
    }
    Vector x0(cfg.p + 1);
    x0(0) = 1.0;
    x0.tail(cfg.p) = rs.standard_normal(cfg.p);
    const double mu0 = x0.dot(beta);
    const double y0 = mu0 + cfg.sigma * rs.standard_normal(1)(0);
    mean_hits += mean_response_ci(m, x0, 0.95).contains(mu0) ? 1 : 0;
    pred_hits += prediction_interval(m, x0, 0.95).contains(y0) ? 1 : 0;
  }
  return {100.0 * static_cast<double>(coef_hits) / static_cast<double>(coef_total),
          100.0 * static_cast<double>(mean_hits) / reps,
          100.0 * static_cast<double>(pred_hits) / reps};
}

// AC6: OCR interval coverage. The OLS figures are reported for reference.
Outcome ac6() {
  Outcome o;
  const auto t0 = Clock::now();
  const CoverageCounts ocr = interval_coverage(Method::OCR, 500);
  const double elapsed = seconds_since(t0);
  const CoverageCounts ols = interval_coverage(Method::OLS, 500);
  auto in_band = [](double v) { return v >= 93.0 && v <= 97.0; };
  o.require(in_band(ocr.coef), "OCR coefficient CI");
  o.require(in_band(ocr.mean), "OCR mean-response CI");
  o.require(in_band(ocr.pred), "OCR prediction interval");
  o.require(elapsed < 60.0, "runtime");
  o.detail << " OCR coverage %: coef " << fmt(ocr.coef, 1) << ", mean response "
           << fmt(ocr.mean, 1) << ", prediction " << fmt(ocr.pred, 1)
           << "; OLS reference: coef " << fmt(ols.coef, 1) << ", mean response "
           << fmt(ols.mean, 1) << ", prediction " << fmt(ols.pred, 1) << "; " << fmt(elapsed, 2)
           << " s";
  return o;
}

// AC7: the constrained covariance never exceeds the unconstrained one.
Outcome ac7() {
  Outcome o;
  std::mt19937_64 gen(707);
  std::normal_distribution<double> nd;
  double worst_eig = 0.0, worst_lev = 0.0;
  for (int i = 0; i < 500; ++i) {
    const RandomCase rc = random_case(gen);
    const FittedModel ols = fit_ols(rc.data);
    const FittedModel ocr = fit_ocr(rc.data);
    const Matrix unscaled_ols = ols.coef_cov / ols.sigma2_hat;
    const Matrix unscaled_ocr = ocr.coef_cov / ocr.sigma2_hat;
    const Matrix diff = unscaled_ols - unscaled_ocr;
    const double scale = unscaled_ols.norm();
    const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (diff + diff.transpose()),
                                                                 Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .minCoeff();
    worst_eig = std::min(worst_eig, min_eig / scale);
    const Eigen::Index p = rc.data.p();
    for (int k = 0; k < 1000; ++k) {
      Vector x0(p);
      for (Eigen::Index j = 0; j < p; ++j) x0(j) = nd(gen);
      if (rc.data.has_intercept_column) x0(0) = 1.0;
      worst_lev = std::max(worst_lev, leverage(ocr, x0) - leverage(ols, x0));
    }
  }
  o.require(worst_eig >= -1e-8, "covariance difference not PSD");
  o.require(worst_lev <= 1e-10, "OCR leverage exceeds OLS");
  o.detail << " 500 instances: min rel eigenvalue of difference " << sci(worst_eig)
           << ", max leverage excess over 500000 points " << sci(worst_lev);
  return o;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// AC8: reproducibility of the CLI simulation reports.
Outcome ac8() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / ("ocr_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string exe = OCR_CLI_PATH;
  auto run = [&](const std::string& grid, const std::string& tag, int workers) {
    const fs::path report = dir / (tag + "_report.csv");
    const fs::path dump = dir / (tag + "_dump.csv");
    const fs::path scatter = dir / (tag + "_scatter.csv");
    const std::string cmd = exe + " simulate --scenario-grid " + grid +
                            " --replications 200 --seed 31337 --workers " +
                            std::to_string(workers) + " --report-out " + report.string() +
                            " --per-replication-dump " + dump.string() + " --scatter-out " +
                            scatter.string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    o.require(status == 0, tag + " exit status");
    return slurp(report) + "\n--\n" + slurp(dump) + "\n--\n" + slurp(scatter);
  };
  for (const std::string grid : {"table1", "table2"}) {
    const std::string a = run(grid, grid + "_a", 1);
    const std::string b = run(grid, grid + "_b", 1);
    const std::string c = run(grid, grid + "_c", 8);
    o.require(!a.empty() && a == b, grid + " repeat run differs");
    o.require(a == c, grid + " 1 vs 8 workers differ");
    o.detail << ' ' << grid << ": " << a.size() << " bytes, repeat "
             << (a == b ? "identical" : "DIFFERENT") << ", workers 1 vs 8 "
             << (a == c ? "identical" : "DIFFERENT") << ';';
  }
  fs::remove_all(dir);
  return o;
}

// AC9: calibration scatter for the representative scenario.
Outcome ac9() {
  Outcome o;
  ScenarioConfig cfg;
  cfg.n = 500;
  cfg.p = 2;
  cfg.sigma = 0.5;
  cfg.base_seed = 20260101;
  const auto tables = representative_scatter(cfg, 0);
  const ScatterTable& ols = tables.at(0);
  const ScatterTable& ocr = tables.at(1);
  o.require(ols.method == Method::OLS && ocr.method == Method::OCR, "method order");
  o.require(ols.y.size() == 500 && ocr.y.size() == 500, "point count");
  o.require(std::fabs(ols.line.slope - 0.669) <= 0.07, "OLS slope");
  o.require(std::fabs(ocr.line.slope - 1.0) <= 1e-8, "OCR slope");
  o.require(std::fabs(ocr.line.intercept) <= 1e-8, "OCR intercept");
  o.detail << " OLS line " << fmt(ols.line.slope, 3) << " x + " << fmt(ols.line.intercept, 3)
           << ", OCR line slope-1 " << sci(ocr.line.slope - 1.0) << ", intercept "
           << sci(ocr.line.intercept);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC1 constraint satisfaction and calibration", ac1},
      {"AC2 agreement with null-space solver", ac2},
      {"AC3 calibration study grid", ac3},
      {"AC4 downstream association grid", ac4},
      {"AC5 attenuation by the shrinkage factor", ac5},
      {"AC6 OCR interval coverage", ac6},
      {"AC7 covariance and leverage dominance", ac7},
      {"AC8 reproducible simulation reports", ac8},
      {"AC9 calibration scatter", ac9},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ":" << o.detail.str() << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
