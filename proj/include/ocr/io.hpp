#pragma once

// File formats: comma-separated data tables, the JSON model file and the
// simulation report tables.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ocr/estimators.hpp"
#include "ocr/simulation.hpp"

namespace ocr {

/// Header plus numeric body of a CSV file.
struct Table {
  std::vector<std::string> header;
  Matrix values;  // rows x header.size()

  /// Index of a named column; throws MissingColumn.
  Eigen::Index column(std::string_view name) const;
};

/// Comma separator, mandatory header row, '.' decimal point. Every cell must
/// parse as a finite double; failures name the 1-based data row and column.
Table read_table(std::istream& in);
Table read_table(const std::filesystem::path& path);

struct CsvDataset {
  Dataset data;
  std::optional<Vector> w;
};

/// X takes every column except the outcome (and w), in file order. A leading
/// all-ones column named "intercept" is flagged as the intercept column.
CsvDataset read_csv(const std::filesystem::path& path, const std::string& outcome_column,
                    const std::optional<std::string>& w_column = std::nullopt);

void write_csv(const std::filesystem::path& path, const Dataset& d,
               const std::string& outcome_column, const std::optional<Vector>& w = std::nullopt,
               const std::string& w_column = "w");

/// Shortest decimal text that parses back to the same double (at most 17
/// significant digits). Empty for NaN.
std::string format_real(double v);

inline constexpr int kModelFormatVersion = 1;

std::string serialize_model(const FittedModel& m);
FittedModel deserialize_model(const std::string& text);
void save_model(const std::filesystem::path& path, const FittedModel& m);
FittedModel load_model(const std::filesystem::path& path);

/// One row per (scenario, method) carrying the calibration columns and the
/// association columns (blank where a study does not produce them).
void write_study_report(std::ostream& out, const std::vector<StudyReport>& reports);

/// One row per (scenario, replication, method).
void write_replication_dump(std::ostream& out, const std::vector<StudyReport>& reports);

/// Points plus one calibration-line row per method and the identity line.
void write_scatter(std::ostream& out, const std::vector<ScatterTable>& tables);

}  // namespace ocr
