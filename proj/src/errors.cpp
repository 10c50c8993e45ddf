#include "ocr/errors.hpp"

namespace ocr {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateOutcome: return "DegenerateOutcome";
    case ErrorCode::RankDeficientConstraints: return "RankDeficientConstraints";
    case ErrorCode::SingularConstraintGram: return "SingularConstraintGram";
    case ErrorCode::DegenerateDf: return "DegenerateDf";
    case ErrorCode::ZeroStandardError: return "ZeroStandardError";
    case ErrorCode::DegenerateRegressor: return "DegenerateRegressor";
    case ErrorCode::InvalidCovariance: return "InvalidCovariance";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InternalConsistency: return "InternalConsistency";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::CorruptModelFile: return "CorruptModelFile";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "UnknownError";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return 10;

    case ErrorCode::MissingColumn: return 20;
    case ErrorCode::NonNumericCell: return 21;
    case ErrorCode::EmptyFile: return 22;
    case ErrorCode::CorruptModelFile: return 23;
    case ErrorCode::IoError: return 24;

    case ErrorCode::NotPositiveDefinite: return 30;
    case ErrorCode::SingularSystem: return 31;
    case ErrorCode::NoConvergence: return 32;
    case ErrorCode::TooFewObservations: return 33;
    case ErrorCode::InvalidProbability: return 34;
    case ErrorCode::DimensionMismatch: return 35;
    case ErrorCode::DegenerateOutcome: return 36;
    case ErrorCode::RankDeficientConstraints: return 37;
    case ErrorCode::SingularConstraintGram: return 38;
    case ErrorCode::DegenerateDf: return 39;
    case ErrorCode::ZeroStandardError: return 40;
    case ErrorCode::DegenerateRegressor: return 41;
    case ErrorCode::InvalidCovariance: return 42;
    case ErrorCode::InvalidArgument: return 43;
    case ErrorCode::InternalConsistency: return 44;
  }
  return 1;
}

}  // namespace ocr
