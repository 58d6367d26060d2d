#pragma once

#include <stdexcept>
#include <string>

namespace silcal {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kParse,
  kEmptyMask,
  kDegenerateMask,
  kNotOnHull,
  kEmptySequence,
  kLengthMismatch,
  kInsufficientCandidates,
  kInfeasibleSolution,
  kNoPath,
  kNoSecondPath,
  kInfeasible,
  kBudgetExceeded,
  kEmptyPointSet,
  kTooFewCorrespondences,
  kNoModel,
  kDegenerateProbability,
  kOutOfFrame,
  kFrontierUndefined,
  kUnknownPreset,
  kMissingGroundTruth,
};

// Coarse grouping used for process exit codes.
enum class ErrorCategory {
  kPrecondition,        // exit 2
  kDegenerateGeometry,  // exit 3
  kBudget,              // exit 4
};

const char* to_string(ErrorCode code) noexcept;
ErrorCategory category_of(ErrorCode code) noexcept;
int exit_code_for(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {});

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

  // Pipeline stage the error surfaced in; empty when raised outside a pipeline.
  const std::string& stage() const noexcept { return stage_; }

  Error with_stage(const std::string& stage) const;

 private:
  ErrorCode code_;
  std::string stage_;
  std::string message_;
};

}  // namespace silcal
