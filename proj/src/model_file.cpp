#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ocr/io.hpp"

namespace ocr {

namespace {

using json = nlohmann::json;

json to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::CorruptModelFile, what);
}

Vector vector_from(const json& j, Eigen::Index expected, const char* field) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != expected) {
    corrupt(std::string(field) + " must be an array of length " + std::to_string(expected));
  }
  Vector v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) {
    const auto& e = j[static_cast<std::size_t>(i)];
    if (!e.is_number()) corrupt(std::string(field) + " has a non-numeric entry");
    v(i) = e.get<double>();
  }
  return v;
}

Matrix matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols, const char* field) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    corrupt(std::string(field) + " must have " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    m.row(i) = vector_from(j[static_cast<std::size_t>(i)], cols, field).transpose();
  }
  return m;
}

const json& field(const json& doc, const char* name) {
  if (!doc.contains(name)) corrupt(std::string("missing field '") + name + "'");
  return doc.at(name);
}

}  // namespace

std::string serialize_model(const FittedModel& m) {
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["method"] = std::string(method_name(m.method));
  doc["n"] = m.n;
  doc["p"] = m.p;
  doc["has_intercept_column"] = m.has_intercept_column;
  doc["column_names"] = m.column_names;
  doc["coefficients"] = to_json(m.beta);
  if (m.constraint) {
    doc["constraint"] = {{"A", to_json(m.constraint->A)}, {"c", to_json(m.constraint->c)}};
  }
  doc["rss"] = m.rss;
  doc["sigma2_hat"] = m.sigma2_hat;
  doc["residual_df"] = m.residual_df;
  doc["coef_cov"] = to_json(m.coef_cov);
  doc["xtx"] = to_json(m.xtx);
  doc["calibration"] = {{"slope", m.calibration.slope}, {"intercept", m.calibration.intercept}};
  doc["diagnostics"] = {{"used_kkt_fallback", m.used_kkt_fallback},
                        {"gram_condition", m.gram_condition},
                        {"multiplier", to_json(m.multiplier)}};
  return doc.dump(2) + "\n";
}

FittedModel deserialize_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    corrupt(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) corrupt("top level is not an object");

  try {
    const auto version = field(doc, "format_version").get<int>();
    if (version != kModelFormatVersion) {
      corrupt("unsupported format_version " + std::to_string(version));
    }
    FittedModel m;
    try {
      m.method = parse_method(field(doc, "method").get<std::string>());
    } catch (const Error&) {
      corrupt("unknown method");
    }
    m.n = field(doc, "n").get<Eigen::Index>();
    m.p = field(doc, "p").get<Eigen::Index>();
    if (m.p < 1 || m.n <= 0) corrupt("invalid dimensions");
    m.has_intercept_column = field(doc, "has_intercept_column").get<bool>();
    m.column_names = field(doc, "column_names").get<std::vector<std::string>>();
    if (static_cast<Eigen::Index>(m.column_names.size()) != m.p) {
      corrupt("column_names length does not match p");
    }
    m.beta = vector_from(field(doc, "coefficients"), m.p, "coefficients");
    if (m.method == Method::OCR) {
      const json& cs = field(doc, "constraint");
      m.constraint = ConstraintSystem{matrix_from(field(cs, "A"), 2, m.p, "constraint.A"),
                                      vector_from(field(cs, "c"), 2, "constraint.c")};
    }
    m.rss = field(doc, "rss").get<double>();
    m.sigma2_hat = field(doc, "sigma2_hat").get<double>();
    m.residual_df = field(doc, "residual_df").get<Eigen::Index>();
    m.coef_cov = matrix_from(field(doc, "coef_cov"), m.p, m.p, "coef_cov");
    m.xtx = matrix_from(field(doc, "xtx"), m.p, m.p, "xtx");
    const json& cal = field(doc, "calibration");
    m.calibration.slope = field(cal, "slope").get<double>();
    m.calibration.intercept = field(cal, "intercept").get<double>();
    if (doc.contains("diagnostics")) {
      const json& diag = doc.at("diagnostics");
      m.used_kkt_fallback = diag.value("used_kkt_fallback", false);
      m.gram_condition = diag.value("gram_condition", 0.0);
      if (diag.contains("multiplier") && !diag.at("multiplier").empty()) {
        m.multiplier = vector_from(diag.at("multiplier"), diag.at("multiplier").size(),
                                   "diagnostics.multiplier");
      }
    }
    try {
      m.gram_factor = Cholesky(m.xtx).lower();
    } catch (const Error& e) {
      corrupt(std::string("xtx is not a valid Gram matrix: ") + e.what());
    }
    return m;
  } catch (const json::exception& e) {
    corrupt(std::string("malformed field: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const FittedModel& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << serialize_model(m);
}

FittedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace ocr
