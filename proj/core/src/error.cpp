#include "silcal/error.hpp"

namespace silcal {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kDegenerateMask: return "DegenerateMask";
    case ErrorCode::kNotOnHull: return "NotOnHull";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kInsufficientCandidates: return "InsufficientCandidates";
    case ErrorCode::kInfeasibleSolution: return "InfeasibleSolution";
    case ErrorCode::kNoPath: return "NoPath";
    case ErrorCode::kNoSecondPath: return "NoSecondPath";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kEmptyPointSet: return "EmptyPointSet";
    case ErrorCode::kTooFewCorrespondences: return "TooFewCorrespondences";
    case ErrorCode::kNoModel: return "NoModel";
    case ErrorCode::kDegenerateProbability: return "DegenerateProbability";
    case ErrorCode::kOutOfFrame: return "OutOfFrame";
    case ErrorCode::kFrontierUndefined: return "FrontierUndefined";
    case ErrorCode::kUnknownPreset: return "UnknownPreset";
    case ErrorCode::kMissingGroundTruth: return "MissingGroundTruth";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kEmptyMask:
    case ErrorCode::kDegenerateMask:
    case ErrorCode::kInsufficientCandidates:
    case ErrorCode::kNoPath:
    case ErrorCode::kNoSecondPath:
    case ErrorCode::kInfeasible:
    case ErrorCode::kNoModel:
    case ErrorCode::kFrontierUndefined:
      return ErrorCategory::kDegenerateGeometry;
    case ErrorCode::kBudgetExceeded:
      return ErrorCategory::kBudget;
    default:
      return ErrorCategory::kPrecondition;
  }
}

int exit_code_for(ErrorCode code) noexcept {
  switch (category_of(code)) {
    case ErrorCategory::kPrecondition: return 2;
    case ErrorCategory::kDegenerateGeometry: return 3;
    case ErrorCategory::kBudget: return 4;
  }
  return 1;
}

namespace {

std::string format_message(ErrorCode code, const std::string& message,
                           const std::string& stage) {
  std::string out;
  if (!stage.empty()) out += "[" + stage + "] ";
  out += to_string(code);
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string stage)
    : std::runtime_error(format_message(code, message, stage)),
      code_(code),
      stage_(std::move(stage)),
      message_(message) {}

Error Error::with_stage(const std::string& stage) const {
  return Error(code_, message_, stage);
}

}  // namespace silcal
