#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ocr {

enum class ErrorCode {
  // numerical
  NotPositiveDefinite,
  SingularSystem,
  NoConvergence,
  TooFewObservations,
  InvalidProbability,
  DimensionMismatch,
  DegenerateOutcome,
  RankDeficientConstraints,
  SingularConstraintGram,
  DegenerateDf,
  ZeroStandardError,
  DegenerateRegressor,
  InvalidCovariance,
  InvalidArgument,
  InternalConsistency,
  // input
  MissingColumn,
  NonNumericCell,
  EmptyFile,
  CorruptModelFile,
  IoError,
  // configuration
  InvalidConfig,
};

std::string_view error_name(ErrorCode code);

/// Process exit status for a given error. Configuration errors map to 10-19,
/// input errors to 20-29 and numerical errors to 30-49; every code is distinct.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the simulation engine when a replication fails; carries the
/// index of the failing replication and the underlying error code.
class ReplicationError : public Error {
 public:
  ReplicationError(ErrorCode code, std::size_t replication, const std::string& what)
      : Error(code, "replication " + std::to_string(replication) + ": " + what),
        replication_(replication) {}

  std::size_t replication() const noexcept { return replication_; }

 private:
  std::size_t replication_;
};

}  // namespace ocr
