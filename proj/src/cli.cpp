#include "ocr/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ocr/calibration.hpp"
#include "ocr/downstream.hpp"
#include "ocr/inference.hpp"
#include "ocr/io.hpp"

namespace ocr {

namespace {

using json = nlohmann::json;

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::InvalidConfig, what);
}

template <class T>
void overlay(std::optional<T>& dst, const std::optional<T>& src) {
  if (src) dst = src;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string fixed_or_na(double v, bool available) {
  return available ? fixed6(v) : "NA";
}

template <class T>
const T& require(const std::optional<T>& v, const char* flag) {
  if (!v) config_error(std::string("missing required option ") + flag);
  return *v;
}

// Output goes to a file when a path is configured, otherwise to `fallback`.
class OutputSink {
 public:
  OutputSink(const std::optional<std::string>& path, std::ostream& fallback) : stream_(&fallback) {
    if (path) {
      file_.open(*path);
      if (!file_) throw Error(ErrorCode::IoError, "cannot write '" + *path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  f << contents;
}

ScenarioConfig scenario_from_json(const json& j, const ScenarioConfig& defaults) {
  static const std::vector<std::string> kKeys = {"study", "n",     "p",           "sigma", "theta",
                                                 "sigma_w", "level", "replications", "seed",
                                                 "intercept"};
  if (!j.is_object()) config_error("each scenario must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      config_error("unknown scenario key '" + key + "'");
    }
  }
  ScenarioConfig s = defaults;
  if (j.contains("study")) s.study = parse_study(j.at("study").get<std::string>());
  if (j.contains("n")) s.n = j.at("n").get<Eigen::Index>();
  if (j.contains("p")) s.p = j.at("p").get<Eigen::Index>();
  if (j.contains("sigma")) s.sigma = j.at("sigma").get<double>();
  if (j.contains("theta")) s.theta = j.at("theta").get<double>();
  if (j.contains("sigma_w")) s.sigma_w = j.at("sigma_w").get<double>();
  if (j.contains("level")) s.level = j.at("level").get<double>();
  if (j.contains("replications")) s.replications = j.at("replications").get<std::size_t>();
  if (j.contains("seed")) s.base_seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("intercept")) s.intercept = j.at("intercept").get<bool>();
  return s;
}

std::optional<std::uint64_t> parse_seed_text(const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

Matrix select_columns(const Table& t, const std::vector<std::string>& names) {
  Matrix X(t.values.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t k = 0; k < names.size(); ++k) {
    X.col(static_cast<Eigen::Index>(k)) = t.values.col(t.column(names[k]));
  }
  return X;
}

double level_of(const RunConfig& cfg) {
  return cfg.level.value_or(0.95);
}

void print_coefficient_table(std::ostream& out, const FittedModel& m, double level) {
  out << "method: " << method_name(m.method) << "  n: " << m.n << "  p: " << m.p
      << "  residual_df: " << m.residual_df << '\n';
  out << "sigma2_hat: " << fixed6(m.sigma2_hat) << "  rss: " << fixed6(m.rss) << '\n';
  if (m.used_kkt_fallback) out << "note: solved via the full KKT system (ill-conditioned X^T X)\n";
  out << "term,estimate,std_error,t_stat,p_value,ci_lower,ci_upper\n";
  for (Eigen::Index j = 0; j < m.p; ++j) {
    const double se = standard_error(m, j);
    const IntervalEstimate ci = coef_ci(m, j, level);
    const bool testable = se > 0.0;
    WaldResult w;
    if (testable) w = wald_test(m, j);
    out << m.column_names[static_cast<std::size_t>(j)] << ',' << fixed6(m.beta(j)) << ','
        << fixed6(se) << ',' << fixed_or_na(w.statistic, testable) << ','
        << fixed_or_na(w.p_value, testable) << ',' << fixed6(ci.lower) << ','
        << fixed6(ci.upper) << '\n';
  }
  out << "calibration slope: " << fixed6(m.calibration.slope) << '\n';
  out << "calibration intercept: " << fixed6(m.calibration.intercept) << '\n';
}

FittedModel model_for(const RunConfig& cfg, const Dataset& d, Method default_method) {
  if (cfg.model_in) return load_model(*cfg.model_in);
  const Method method = cfg.method ? parse_method(*cfg.method) : default_method;
  return fit(d, method);
}

Vector predict_on(const FittedModel& m, const Dataset& d) {
  if (m.p != d.p()) {
    throw Error(ErrorCode::DimensionMismatch, "model has p = " + std::to_string(m.p) +
                                                  ", data has " + std::to_string(d.p()) +
                                                  " predictors");
  }
  return predict(m, d.X);
}

void add_common_options(CLI::App* app, RunConfig& f) {
  app->add_option("--input", f.input, "input CSV file");
  app->add_option("--outcome", f.outcome, "outcome column name");
  app->add_option("--w-column", f.w_column, "external variable column name");
  app->add_option("--method", f.method, "ols or ocr");
  app->add_option("--level", f.level, "confidence level in (0, 1)");
  app->add_option("--seed", f.seed, "random seed (falls back to OCR_SEED)");
  app->add_option("--model-out", f.model_out, "write the fitted model here");
  app->add_option("--model-in", f.model_in, "read a fitted model from here");
  app->add_option("--report-out", f.report_out, "write the report CSV here");
  app->add_option("--scenario-grid", f.scenario_grid, "table1, table2 or custom");
  app->add_option("--replications", f.replications, "replications per scenario");
  app->add_option("--per-replication-dump", f.per_replication_dump,
                  "write per-replication records here");
  app->add_option("--scatter-out", f.scatter_out, "write calibration scatter data here");
  app->add_option("--workers", f.workers, "worker threads for simulate (0 = all cores)");
}

}  // namespace

void RunConfig::merge_from(const RunConfig& flags) {
  if (!flags.subcommand.empty()) subcommand = flags.subcommand;
  overlay(input, flags.input);
  overlay(outcome, flags.outcome);
  overlay(w_column, flags.w_column);
  overlay(method, flags.method);
  overlay(level, flags.level);
  overlay(seed, flags.seed);
  overlay(model_out, flags.model_out);
  overlay(model_in, flags.model_in);
  overlay(report_out, flags.report_out);
  overlay(scenario_grid, flags.scenario_grid);
  overlay(replications, flags.replications);
  overlay(per_replication_dump, flags.per_replication_dump);
  overlay(scatter_out, flags.scatter_out);
  overlay(workers, flags.workers);
  if (!flags.scenarios.empty()) scenarios = flags.scenarios;
}

void RunConfig::validate() const {
  if (level && !(*level > 0.0 && *level < 1.0)) config_error("--level must lie in (0, 1)");
  if (method) parse_method(*method);
  if (replications && *replications < 1) config_error("--replications must be at least 1");
  if (scenario_grid && *scenario_grid != "table1" && *scenario_grid != "table2" &&
      *scenario_grid != "custom") {
    config_error("--scenario-grid must be table1, table2 or custom");
  }
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    config_error(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) config_error("config file must hold a JSON object");

  RunConfig cfg;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "input") cfg.input = value.get<std::string>();
      else if (key == "outcome") cfg.outcome = value.get<std::string>();
      else if (key == "w_column") cfg.w_column = value.get<std::string>();
      else if (key == "method") cfg.method = value.get<std::string>();
      else if (key == "level") cfg.level = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "model_out") cfg.model_out = value.get<std::string>();
      else if (key == "model_in") cfg.model_in = value.get<std::string>();
      else if (key == "report_out") cfg.report_out = value.get<std::string>();
      else if (key == "scenario_grid") cfg.scenario_grid = value.get<std::string>();
      else if (key == "replications") cfg.replications = value.get<std::size_t>();
      else if (key == "per_replication_dump") cfg.per_replication_dump = value.get<std::string>();
      else if (key == "scatter_out") cfg.scatter_out = value.get<std::string>();
      else if (key == "workers") cfg.workers = value.get<unsigned>();
      else if (key == "scenarios") {
        if (!value.is_array()) config_error("'scenarios' must be an array");
        for (const auto& s : value) cfg.scenarios.push_back(scenario_from_json(s, ScenarioConfig{}));
      } else {
        config_error("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    config_error(std::string("config value has the wrong type: ") + e.what());
  }
  return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::uint64_t resolve_seed(const RunConfig& cfg) {
  if (cfg.seed) return *cfg.seed;
  if (const char* env = std::getenv("OCR_SEED"); env != nullptr && *env != '\0') {
    const auto v = parse_seed_text(env);
    if (!v) config_error(std::string("OCR_SEED is not an unsigned integer: '") + env + "'");
    return *v;
  }
  return kDefaultSeed;
}

std::vector<ScenarioConfig> scenario_grid(const RunConfig& cfg) {
  const std::string grid = cfg.scenario_grid.value_or("table1");
  const std::uint64_t seed = resolve_seed(cfg);
  const std::size_t reps = cfg.replications.value_or(500);
  std::vector<ScenarioConfig> out;
  if (grid == "table1") {
    out = factorial_grid(Study::Calibration, reps, seed);
  } else if (grid == "table2") {
    out = factorial_grid(Study::Downstream, reps, seed);
  } else if (grid == "custom") {
    if (cfg.scenarios.empty()) config_error("custom grid needs 'scenarios' in the config file");
    out = cfg.scenarios;
    for (auto& s : out) {
      if (cfg.replications) s.replications = *cfg.replications;
      if (cfg.seed || std::getenv("OCR_SEED") != nullptr) s.base_seed = seed;
    }
  } else {
    config_error("unknown scenario grid '" + grid + "'");
  }
  for (auto& s : out) {
    if (cfg.level) s.level = *cfg.level;
    s.validate();
  }
  return out;
}

int cli_fit(const RunConfig& cfg, std::ostream& out) {
  const CsvDataset csv = read_csv(require(cfg.input, "--input"), require(cfg.outcome, "--outcome"));
  const Method method = cfg.method ? parse_method(*cfg.method) : Method::OCR;
  const FittedModel m = fit(csv.data, method);
  print_coefficient_table(out, m, level_of(cfg));
  if (cfg.model_out) save_model(*cfg.model_out, m);
  return 0;
}

int cli_predict(const RunConfig& cfg, std::ostream& out) {
  const FittedModel m = load_model(require(cfg.model_in, "--model-in"));
  const Table t = read_table(std::filesystem::path(require(cfg.input, "--input")));
  const Matrix X = select_columns(t, m.column_names);
  const double level = level_of(cfg);

  OutputSink sink(cfg.report_out, out);
  std::ostream& os = sink.stream();
  os << "row,prediction,ci_lower,ci_upper,pi_lower,pi_upper,level\n";
  const Vector yhat = predict(m, X);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Vector x0 = X.row(i).transpose();
    const IntervalEstimate ci = mean_response_ci(m, x0, level);
    const IntervalEstimate pi = prediction_interval(m, x0, level);
    os << (i + 1) << ',' << format_real(yhat(i)) << ',' << format_real(ci.lower) << ','
       << format_real(ci.upper) << ',' << format_real(pi.lower) << ',' << format_real(pi.upper)
       << ',' << format_real(level) << '\n';
  }
  return 0;
}

int cli_calibrate(const RunConfig& cfg, std::ostream& out) {
  const CsvDataset csv = read_csv(require(cfg.input, "--input"), require(cfg.outcome, "--outcome"));
  const Dataset& d = csv.data;

  std::vector<FittedModel> models;
  if (cfg.model_in) {
    models.push_back(load_model(*cfg.model_in));
  } else if (cfg.method) {
    models.push_back(fit(d, parse_method(*cfg.method)));
  } else {
    models.push_back(fit_ols(d));
    models.push_back(fit_ocr(d));
  }

  std::vector<ScatterTable> tables;
  out << "method,calibration_slope,calibration_intercept\n";
  for (const auto& m : models) {
    predict_on(m, d);
    tables.push_back(emit_calibration_scatter(m, d));
    const auto& line = tables.back().line;
    out << method_name(m.method) << ',' << fixed6(line.slope) << ',' << fixed6(line.intercept)
        << '\n';
  }
  out << "\nmean prediction error by outcome quintile\n";
  out << "method,bin,outcome_mean,mean_error\n";
  for (const auto& t : tables) {
    const BinnedError be = binned_prediction_error(t.y, t.yhat, 5);
    for (std::size_t b = 0; b < be.bin_center.size(); ++b) {
      out << method_name(t.method) << ',' << (b + 1) << ',' << fixed6(be.bin_center[b]) << ','
          << fixed6(be.mean_error[b]) << '\n';
    }
  }
  if (cfg.scatter_out) {
    std::ostringstream ss;
    write_scatter(ss, tables);
    write_file(*cfg.scatter_out, ss.str());
  }
  return 0;
}

int cli_downstream(const RunConfig& cfg, std::ostream& out) {
  const std::string& w_column = require(cfg.w_column, "--w-column");
  const CsvDataset csv =
      read_csv(require(cfg.input, "--input"), require(cfg.outcome, "--outcome"), w_column);
  const Dataset& d = csv.data;
  const Vector& w = *csv.w;
  const double level = level_of(cfg);

  const FittedModel m = model_for(cfg, d, Method::OCR);
  const Vector yhat = predict_on(m, d);
  const CalibrationFit cal = calibration_fit(d.y, yhat);
  const AssociationEstimate via_pred = simple_regression(yhat, w, level);
  const AssociationEstimate direct = simple_regression(d.y, w, level);

  out << "method: " << method_name(m.method) << '\n';
  out << "calibration slope (eta_hat): " << fixed6(cal.slope) << '\n';
  out << "estimate,theta_hat,std_error,ci_lower,ci_upper\n";
  out << "predicted_on_w," << fixed6(via_pred.theta_hat) << ',' << fixed6(via_pred.se) << ','
      << fixed6(via_pred.ci.lower) << ',' << fixed6(via_pred.ci.upper) << '\n';
  out << "outcome_on_w," << fixed6(direct.theta_hat) << ',' << fixed6(direct.se) << ','
      << fixed6(direct.ci.lower) << ',' << fixed6(direct.ci.upper) << '\n';
  out << "attenuation ratio (theta_hat / direct): "
      << (direct.theta_hat != 0.0 ? fixed6(via_pred.theta_hat / direct.theta_hat) : "NA") << '\n';
  out << "predicted attenuation (eta_hat * direct): "
      << fixed6(attenuation_prediction(cal.slope, direct.theta_hat)) << '\n';
  return 0;
}

int cli_simulate(const RunConfig& cfg, std::ostream& out) {
  const std::vector<ScenarioConfig> grid = scenario_grid(cfg);
  const unsigned workers = cfg.workers.value_or(1);

  std::vector<StudyReport> reports;
  for (const auto& s : grid) {
    try {
      reports.push_back(run_study(s, workers));
    } catch (const Error& e) {
      throw Error(e.code(), "scenario " + std::string(study_name(s.study)) +
                                " n=" + std::to_string(s.n) + " p=" + std::to_string(s.p) +
                                " sigma=" + format_real(s.sigma) + ": " + e.what());
    }
  }

  {
    OutputSink sink(cfg.report_out, out);
    write_study_report(sink.stream(), reports);
  }
  if (cfg.per_replication_dump) {
    std::ostringstream ss;
    write_replication_dump(ss, reports);
    write_file(*cfg.per_replication_dump, ss.str());
  }
  if (cfg.scatter_out) {
    // the representative scatter scenario is n = 500, p = 2, sigma = 0.5
    ScenarioConfig rep = grid.front();
    for (const auto& s : grid) {
      if (s.n == 500 && s.p == 2 && s.sigma == 0.5) {
        rep = s;
        break;
      }
    }
    rep.study = Study::Calibration;
    std::ostringstream ss;
    write_scatter(ss, representative_scatter(rep, 0));
    write_file(*cfg.scatter_out, ss.str());
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Outcome-calibrated regression toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override its values)");

  RunConfig flags;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"fit", "fit an OLS or OCR model and print the coefficient table"},
      {"predict", "point predictions with confidence and prediction intervals"},
      {"calibrate", "calibration slope/intercept diagnostics and scatter data"},
      {"downstream", "association of predicted outcomes with an external variable"},
      {"simulate", "Monte Carlo calibration, downstream and attenuation studies"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common_options(sub, flags);
    sub->add_option("--config", config_path, "JSON config file (flags override its values)");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(ErrorCode::InvalidConfig);
  }

  try {
    flags.subcommand = app.get_subcommands().front()->get_name();
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config_file(config_path);
    cfg.merge_from(flags);
    cfg.validate();

    if (cfg.subcommand == "fit") return cli_fit(cfg, out);
    if (cfg.subcommand == "predict") return cli_predict(cfg, out);
    if (cfg.subcommand == "calibrate") return cli_calibrate(cfg, out);
    if (cfg.subcommand == "downstream") return cli_downstream(cfg, out);
    if (cfg.subcommand == "simulate") return cli_simulate(cfg, out);
    config_error("unknown subcommand '" + cfg.subcommand + "'");
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace ocr
