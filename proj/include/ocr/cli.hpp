#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ocr/estimators.hpp"
#include "ocr/simulation.hpp"

namespace ocr {

/// Parameters for one CLI invocation, merged from an optional JSON config
/// file and command-line flags (flags win).
struct RunConfig {
  std::string subcommand;
  std::optional<std::string> input;
  std::optional<std::string> outcome;
  std::optional<std::string> w_column;
  std::optional<std::string> method;
  std::optional<double> level;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model_out;
  std::optional<std::string> model_in;
  std::optional<std::string> report_out;
  std::optional<std::string> scenario_grid;
  std::optional<std::size_t> replications;
  std::optional<std::string> per_replication_dump;
  std::optional<std::string> scatter_out;
  std::optional<unsigned> workers;
  std::vector<ScenarioConfig> scenarios;  // "custom" grid, config file only

  /// Overlays every field set in `flags` onto this config.
  void merge_from(const RunConfig& flags);
  /// Range checks shared by all subcommands; throws InvalidConfig.
  void validate() const;
};

inline constexpr std::uint64_t kDefaultSeed = 20260101;

/// Reads a JSON config file. Unknown keys are rejected with InvalidConfig.
RunConfig load_config_file(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text);

/// Seed precedence: flag or config file, then the OCR_SEED environment
/// variable, then kDefaultSeed.
std::uint64_t resolve_seed(const RunConfig& cfg);

/// Scenarios for --scenario-grid {table1|table2|custom}.
std::vector<ScenarioConfig> scenario_grid(const RunConfig& cfg);

int cli_fit(const RunConfig& cfg, std::ostream& out);
int cli_predict(const RunConfig& cfg, std::ostream& out);
int cli_calibrate(const RunConfig& cfg, std::ostream& out);
int cli_downstream(const RunConfig& cfg, std::ostream& out);
int cli_simulate(const RunConfig& cfg, std::ostream& out);

/// Full entry point: parses argv-style arguments (without the program name),
/// dispatches, and maps errors to exit codes with a one-line diagnostic on err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ocr
