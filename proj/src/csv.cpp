#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ocr/io.hpp"

namespace ocr {

namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

Eigen::Index Table::column(std::string_view name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return static_cast<Eigen::Index>(j);
  }
  throw Error(ErrorCode::MissingColumn, "column '" + std::string(name) + "' not found");
}

Table read_table(std::istream& in) {
  std::string line;
  Table t;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) {
    throw Error(ErrorCode::EmptyFile, "no header row");
  }
  t.header = split_line(line);
  for (const auto& h : t.header) {
    if (h.empty()) throw Error(ErrorCode::EmptyFile, "header has an empty column name");
  }

  std::vector<std::vector<double>> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_line(line);
    if (cells.size() != t.header.size()) {
      throw Error(ErrorCode::NonNumericCell, "row " + std::to_string(row) + " has " +
                                                 std::to_string(cells.size()) + " cells, header has " +
                                                 std::to_string(t.header.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (!parse_double(cells[j], values[j])) {
        throw Error(ErrorCode::NonNumericCell, "row " + std::to_string(row) + ", column '" +
                                                   t.header[j] + "': '" + cells[j] + "'");
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) {
    throw Error(ErrorCode::EmptyFile, "no data rows");
  }
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return t;
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  }
  return read_table(in);
}

CsvDataset read_csv(const std::filesystem::path& path, const std::string& outcome_column,
                    const std::optional<std::string>& w_column) {
  const Table t = read_table(path);
  const Eigen::Index y_col = t.column(outcome_column);
  const Eigen::Index w_col = w_column ? t.column(*w_column) : -1;

  std::vector<Eigen::Index> x_cols;
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(t.header.size()); ++j) {
    if (j == y_col || j == w_col) continue;
    x_cols.push_back(j);
    names.push_back(t.header[static_cast<std::size_t>(j)]);
  }
  Matrix X(t.values.rows(), static_cast<Eigen::Index>(x_cols.size()));
  for (std::size_t k = 0; k < x_cols.size(); ++k) {
    X.col(static_cast<Eigen::Index>(k)) = t.values.col(x_cols[k]);
  }
  // a leading all-ones column named "intercept" is the intercept column, so
  // that write_csv / read_csv round-trips a Dataset exactly
  const bool intercept = !names.empty() && names.front() == "intercept" &&
                         (X.col(0).array() == 1.0).all();
  CsvDataset out{make_dataset(std::move(X), t.values.col(y_col), intercept, std::move(names)),
                 std::nullopt};
  if (w_column) out.w = t.values.col(w_col);
  return out;
}

void write_csv(const std::filesystem::path& path, const Dataset& d,
               const std::string& outcome_column, const std::optional<Vector>& w,
               const std::string& w_column) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  }
  for (const auto& name : d.column_names) out << name << ',';
  out << outcome_column;
  if (w) out << ',' << w_column;
  out << '\n';
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    for (Eigen::Index j = 0; j < d.p(); ++j) out << format_real(d.X(i, j)) << ',';
    out << format_real(d.y(i));
    if (w) out << ',' << format_real((*w)(i));
    out << '\n';
  }
}

std::string format_real(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) {
    throw Error(ErrorCode::InternalConsistency, "number formatting failed");
  }
  return std::string(buf, ptr);
}

}  // namespace ocr
