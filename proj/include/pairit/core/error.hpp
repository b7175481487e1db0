#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pairit {

enum class ErrorCode {
  // core-model
  SequenceGap,
  TimeRegression,
  InvalidLog,
  InvalidEvent,
  // matchmaking
  AlreadyAssigned,
  NotAssigned,
  AlreadyQueued,
  // sync-engine
  StaleBeyondRebase,
  SessionNotActive,
  UnknownImage,
  UnknownActor,
  AgentMayNotSubmit,
  EmptyPrompt,
  // analytics
  NoMessages,
  ZeroWork,
  EmptyCorpus,
  NoSubmissions,
  MissingAnswer,
  DecodeFailure,
  // stats
  RankDeficient,
  TooFewRows,
  SingleCluster,
  NonConvergence,
  DegenerateGroups,
  TooFew,
  MissingColumn,
  // fieldkit
  InfeasibleConstraints,
  InsufficientZips,
  InvalidSample,
  ZeroImpressions,
  CoverageInfeasible,
  SamplesExhausted,
  MissingImage,
  // service
  BadConfig,
  BindFailure,
  ScenarioError,
  MissingInputs,
  BadRequest,
  Unauthorized,
  ClientError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pairit
