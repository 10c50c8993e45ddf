#include <ostream>

#include "ocr/io.hpp"

namespace ocr {

namespace {

void write_scenario(std::ostream& out, const ScenarioConfig& s) {
  out << study_name(s.study) << ',' << s.n << ',' << s.p << ',' << format_real(s.sigma) << ','
      << format_real(s.theta) << ',' << format_real(s.sigma_w) << ',' << s.replications << ','
      << s.base_seed << ',' << (s.intercept ? 1 : 0);
}

constexpr const char* kScenarioHeader = "study,n,p,sigma,theta,sigma_w,replications,seed,intercept";

}  // namespace

void write_study_report(std::ostream& out, const std::vector<StudyReport>& reports) {
  out << kScenarioHeader
      << ",method,mse_mean,mse_sd,slope_mean,slope_sd,intercept_mean,intercept_sd,"
         "theta_mean,theta_sd,bias,bsr,coverage_pct,theta_direct_mean\n";
  for (const auto& r : reports) {
    for (Method m : {Method::OLS, Method::OCR}) {
      const MethodAggregate& a = r.aggregate(m);
      write_scenario(out, r.scenario);
      out << ',' << method_name(m) << ',' << format_real(a.mse_mean) << ','
          << format_real(a.mse_sd) << ',' << format_real(a.slope_mean) << ','
          << format_real(a.slope_sd) << ',' << format_real(a.intercept_mean) << ','
          << format_real(a.intercept_sd) << ',' << format_real(a.theta_mean) << ','
          << format_real(a.theta_sd) << ',' << format_real(a.bias) << ',' << format_real(a.bsr)
          << ',' << format_real(a.coverage_pct) << ',' << format_real(r.theta_direct_mean)
          << '\n';
    }
  }
}

void write_replication_dump(std::ostream& out, const std::vector<StudyReport>& reports) {
  out << kScenarioHeader
      << ",replication,method,mse,slope,intercept,theta_hat,se_theta,ci_covers,theta_direct\n";
  for (const auto& r : reports) {
    const bool with_theta = r.scenario.study != Study::Calibration;
    for (const auto& rec : r.records) {
      for (Method m : {Method::OLS, Method::OCR}) {
        const MethodMetrics& mm = m == Method::OLS ? rec.ols : rec.ocr;
        write_scenario(out, r.scenario);
        out << ',' << rec.replication_index << ',' << method_name(m) << ','
            << format_real(mm.mse) << ',' << format_real(mm.slope) << ','
            << format_real(mm.intercept) << ',';
        if (with_theta) {
          out << format_real(mm.theta_hat) << ',' << format_real(mm.se_theta) << ','
              << (mm.ci_covers ? 1 : 0) << ',' << format_real(rec.theta_direct);
        } else {
          out << ",,,";
        }
        out << '\n';
      }
    }
  }
}

void write_scatter(std::ostream& out, const std::vector<ScatterTable>& tables) {
  out << "method,kind,y,yhat,slope,intercept\n";
  for (const auto& t : tables) {
    const auto name = method_name(t.method);
    for (Eigen::Index i = 0; i < t.y.size(); ++i) {
      out << name << ",point," << format_real(t.y(i)) << ',' << format_real(t.yhat(i)) << ",,\n";
    }
    out << name << ",calibration_line,,," << format_real(t.line.slope) << ','
        << format_real(t.line.intercept) << '\n';
  }
  out << "reference,identity_line,,,1,0\n";
}

}  // namespace ocr
