#include <catch_amalgamated.hpp>

#include <sstream>

#include "ocr/io.hpp"
#include "ocr/simulation.hpp"

using namespace ocr;
using Catch::Approx;

namespace {

ScenarioConfig scenario(Study study, Eigen::Index n, Eigen::Index p, double sigma,
                        std::size_t reps, std::uint64_t seed = 1) {
  ScenarioConfig c;
  c.study = study;
  c.n = n;
  c.p = p;
  c.sigma = sigma;
  c.replications = reps;
  c.base_seed = seed;
  return c;
}

std::string report_text(const StudyReport& r) {
  std::ostringstream out;
  write_study_report(out, {r});
  write_replication_dump(out, {r});
  return out.str();
}

}  // namespace

TEST_CASE("linear DGP", "[simulation]") {
  SECTION("noise-free outcome lies in the column space") {
    ScenarioConfig c = scenario(Study::Calibration, 50, 3, 0.0, 1);
    RandomSource rs(1, 0);
    const Dataset d = dgp_linear(c, rs);
    CHECK(d.has_intercept_column);
    CHECK(d.p() == 4);
    CHECK(fit_ols(d).rss < 1e-24);
  }
  SECTION("outcome variance") {
    for (Eigen::Index p : {2, 5}) {
      ScenarioConfig c = scenario(Study::Calibration, 100000, p, 1.0, 1);
      RandomSource rs(2, 0);
      const Dataset d = dgp_linear(c, rs);
      CHECK(sample_variance(d.y) == Approx(c.outcome_variance()).epsilon(0.05));
    }
  }
  SECTION("identical seeds give identical data") {
    ScenarioConfig c = scenario(Study::Calibration, 30, 2, 0.5, 1);
    RandomSource a(9, 4), b(9, 4), other(9, 5);
    const Dataset da = dgp_linear(c, a);
    const Dataset db = dgp_linear(c, b);
    CHECK(da.X == db.X);
    CHECK(da.y == db.y);
    CHECK(dgp_linear(c, other).y != da.y);
  }
  SECTION("without the intercept column") {
    ScenarioConfig c = scenario(Study::Calibration, 30, 2, 0.5, 1);
    c.intercept = false;
    RandomSource rs(1, 0);
    const Dataset d = dgp_linear(c, rs);
    CHECK(d.p() == 2);
    CHECK_FALSE(d.has_intercept_column);
  }
}

TEST_CASE("downstream DGP", "[simulation]") {
  ScenarioConfig c = scenario(Study::Downstream, 100000, 2, 0.5, 1);
  SECTION("null association") {
    c.theta = 0.0;
    RandomSource rs(3, 0);
    const DownstreamDraw dd = dgp_downstream(c, rs);
    CHECK(std::fabs(sample_covariance(dd.data.y, dd.w)) < 0.02);
  }
  SECTION("population slope and moments") {
    RandomSource rs(3, 1);
    const DownstreamDraw dd = dgp_downstream(c, rs);
    CHECK(std::fabs(simple_regression(dd.data.y, dd.w).theta_hat - 0.5) < 0.03);
    CHECK(sample_variance(dd.data.y) == Approx(c.outcome_variance()).epsilon(0.05));
    CHECK(sample_variance(dd.w) == Approx(1.0).epsilon(0.05));
  }
  SECTION("non positive definite covariance") {
    c.theta = 2.0;
    RandomSource rs(3, 2);
    CHECK_THROWS_MATCHES(dgp_downstream(c, rs), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == ErrorCode::InvalidCovariance;
                         }));
  }
  SECTION("predictors carry no information about the outcome") {
    ScenarioConfig small = scenario(Study::Downstream, 200, 5, 1.0, 200);
    const StudyReport r = run_downstream_study(small, 0);
    // in-sample R^2 of pure-noise predictors is about p / (n - 1)
    CHECK(r.ols.slope_mean == Approx(5.0 / 199.0).margin(0.01));
  }
}

TEST_CASE("attenuation DGP", "[simulation]") {
  ScenarioConfig c = scenario(Study::Attenuation, 100000, 2, 0.5, 1);
  RandomSource rs(5, 0);
  const DownstreamDraw dd = dgp_attenuation(c, rs);
  CHECK(std::fabs(simple_regression(dd.data.y, dd.w).theta_hat - c.theta) < 0.03);
  CHECK(sample_variance(dd.w) == Approx(c.sigma_w * c.sigma_w).epsilon(0.05));
}

TEST_CASE("calibration study matches the reference cells", "[simulation][montecarlo]") {
  const StudyReport a = run_calibration_study(scenario(Study::Calibration, 500, 2, 0.5, 500, 11), 0);
  CHECK(a.ols.slope_mean == Approx(0.669).margin(0.01));
  CHECK(a.ocr.slope_mean == Approx(1.0).margin(1e-8));
  CHECK(a.ocr.slope_sd < 1e-8);
  CHECK(std::fabs(a.ocr.intercept_mean) < 1e-10);

  const StudyReport b = run_calibration_study(scenario(Study::Calibration, 200, 2, 1.0, 500, 12), 0);
  CHECK(b.ols.mse_mean == Approx(0.978).margin(0.05));
  CHECK(b.ocr.mse_mean == Approx(2.956).margin(0.35));
  CHECK(std::fabs(b.ocr.intercept_mean) < 1e-10);
  CHECK(std::isnan(b.ols.theta_mean));
}

TEST_CASE("calibration study invariants on the factorial grid", "[simulation][montecarlo]") {
  for (const ScenarioConfig& c : factorial_grid(Study::Calibration, 500, 2027)) {
    const StudyReport r = run_calibration_study(c, 0);
    INFO("n = " << c.n << ", p = " << c.p << ", sigma = " << c.sigma);
    CHECK(r.ols.slope_mean == Approx(c.population_eta()).margin(0.03));
    const double columns = static_cast<double>(c.p + 1);
    const double expected_mse = c.sigma * c.sigma * (static_cast<double>(c.n) - columns) / c.n;
    CHECK(r.ols.mse_mean == Approx(expected_mse).epsilon(0.05));
    CHECK(r.ocr.slope_mean == Approx(1.0).margin(1e-8));
    CHECK(r.ocr.mse_mean > r.ols.mse_mean);
    REQUIRE(r.records.size() == 500);
    for (std::size_t i = 0; i < r.records.size(); ++i) CHECK(r.records[i].replication_index == i);
  }
}

TEST_CASE("downstream study", "[simulation][montecarlo]") {
  SECTION("reference cell (200, 5, 1.0)") {
    const StudyReport r = run_downstream_study(scenario(Study::Downstream, 200, 5, 1.0, 500, 21), 0);
    CHECK(r.ols.theta_mean == Approx(0.013).margin(0.01));
    CHECK(r.ols.coverage_pct < 2.0);
    CHECK(std::fabs(r.ocr.bias) < 0.15);
    CHECK(r.ocr.coverage_pct >= 93.0);
    CHECK(r.ocr.coverage_pct <= 99.0);
    CHECK(r.ols.bias == Approx(r.ols.theta_mean - 0.5));
    CHECK(r.ols.bsr == Approx(std::fabs(r.ols.bias) / r.ols.theta_sd));
    CHECK(r.theta_direct_mean == Approx(0.5).margin(0.02));
  }
  SECTION("reference cell (500, 2, 0.5)") {
    const StudyReport r = run_downstream_study(scenario(Study::Downstream, 500, 2, 0.5, 500, 22), 0);
    CHECK(r.ols.bsr > 20.0);
  }
  SECTION("null association") {
    ScenarioConfig c = scenario(Study::Downstream, 200, 2, 0.5, 500, 23);
    c.theta = 0.0;
    const StudyReport r = run_downstream_study(c, 0);
    CHECK(std::fabs(r.ols.bias) <= 3.0 * r.ols.theta_sd / std::sqrt(500.0));
    CHECK(std::fabs(r.ocr.bias) <= 3.0 * r.ocr.theta_sd / std::sqrt(500.0));
  }
}

TEST_CASE("attenuation study", "[simulation][montecarlo]") {
  ScenarioConfig c = scenario(Study::Attenuation, 200, 2, 0.5, 500, 31);
  const StudyReport r = run_attenuation_study(c, 0);
  CHECK(r.ols.theta_mean / r.theta_direct_mean == Approx(c.population_eta()).margin(0.05));
  CHECK(r.ocr.theta_mean == Approx(r.theta_direct_mean).margin(0.05 * c.theta));
}

TEST_CASE("results do not depend on the number of workers", "[simulation][determinism]") {
  for (Study s : {Study::Calibration, Study::Downstream, Study::Attenuation}) {
    const ScenarioConfig c = scenario(s, 200, 5, 1.0, 64, 77);
    const std::string one = report_text(run_study(c, 1));
    CHECK(report_text(run_study(c, 3)) == one);
    CHECK(report_text(run_study(c, 8)) == one);
    CHECK(report_text(run_study(c, 1)) == one);
  }
}

TEST_CASE("study failures name the replication", "[simulation]") {
  ScenarioConfig c = scenario(Study::Downstream, 50, 2, 0.5, 10);
  c.theta = 3.0;
  for (unsigned workers : {1u, 4u}) {
    try {
      run_downstream_study(c, workers);
      FAIL("expected a replication error");
    } catch (const ReplicationError& e) {
      CHECK(e.replication() == 0);
      CHECK(e.code() == ErrorCode::InvalidCovariance);
      CHECK(std::string(e.what()).find("replication 0") != std::string::npos);
    }
  }
  CHECK_THROWS_AS(run_calibration_study(scenario(Study::Downstream, 50, 2, 0.5, 10)), Error);
}

TEST_CASE("scenario validation", "[simulation]") {
  CHECK_NOTHROW(scenario(Study::Calibration, 200, 2, 0.5, 1).validate());
  CHECK_THROWS_AS(scenario(Study::Calibration, 3, 2, 0.5, 1).validate(), Error);
  CHECK_THROWS_AS(scenario(Study::Calibration, 200, 0, 0.5, 1).validate(), Error);
  CHECK_THROWS_AS(scenario(Study::Calibration, 200, 2, -1.0, 1).validate(), Error);
  CHECK_THROWS_AS(scenario(Study::Calibration, 200, 2, 0.5, 0).validate(), Error);
  ScenarioConfig bad_level = scenario(Study::Calibration, 200, 2, 0.5, 1);
  bad_level.level = 1.5;
  CHECK_THROWS_AS(bad_level.validate(), Error);
  CHECK(parse_study("downstream") == Study::Downstream);
  CHECK(study_name(Study::Attenuation) == "attenuation");
  CHECK_THROWS_AS(parse_study("table3"), Error);
}

TEST_CASE("factorial grid order", "[simulation]") {
  const auto grid = factorial_grid(Study::Downstream, 200, 5);
  REQUIRE(grid.size() == 8);
  const Eigen::Index ns[] = {200, 500, 200, 500, 200, 500, 200, 500};
  const Eigen::Index ps[] = {2, 2, 5, 5, 2, 2, 5, 5};
  const double sigmas[] = {0.5, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0};
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(grid[i].n == ns[i]);
    CHECK(grid[i].p == ps[i]);
    CHECK(grid[i].sigma == sigmas[i]);
    CHECK(grid[i].study == Study::Downstream);
    CHECK(grid[i].replications == 200);
  }
}

TEST_CASE("calibration scatter", "[simulation]") {
  const ScenarioConfig c = scenario(Study::Calibration, 500, 2, 0.5, 1, 2);
  const auto tables = representative_scatter(c);
  REQUIRE(tables.size() == 2);
  CHECK(tables[0].method == Method::OLS);
  CHECK(tables[0].y.size() == 500);
  CHECK(tables[0].line.slope == Approx(0.669).margin(0.07));
  CHECK(tables[1].line.slope == Approx(1.0).margin(1e-8));
  CHECK(tables[1].line.intercept == Approx(0.0).margin(1e-8));

  std::ostringstream out;
  write_scatter(out, tables);
  const std::string text = out.str();
  std::size_t lines = 0;
  for (char ch : text) lines += ch == '\n';
  CHECK(lines == 1 + 2 * (500 + 1) + 1);
  CHECK(text.rfind("reference,identity_line,,,1,0\n") == text.size() - 30);
}
