#include "pairit/core/error.hpp"

namespace pairit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SequenceGap: return "SequenceGap";
    case ErrorCode::TimeRegression: return "TimeRegression";
    case ErrorCode::InvalidLog: return "InvalidLog";
    case ErrorCode::InvalidEvent: return "InvalidEvent";
    case ErrorCode::AlreadyAssigned: return "AlreadyAssigned";
    case ErrorCode::NotAssigned: return "NotAssigned";
    case ErrorCode::AlreadyQueued: return "AlreadyQueued";
    case ErrorCode::StaleBeyondRebase: return "StaleBeyondRebase";
    case ErrorCode::SessionNotActive: return "SessionNotActive";
    case ErrorCode::UnknownImage: return "UnknownImage";
    case ErrorCode::UnknownActor: return "UnknownActor";
    case ErrorCode::AgentMayNotSubmit: return "AgentMayNotSubmit";
    case ErrorCode::EmptyPrompt: return "EmptyPrompt";
    case ErrorCode::NoMessages: return "NoMessages";
    case ErrorCode::ZeroWork: return "ZeroWork";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::NoSubmissions: return "NoSubmissions";
    case ErrorCode::MissingAnswer: return "MissingAnswer";
    case ErrorCode::DecodeFailure: return "DecodeFailure";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::SingleCluster: return "SingleCluster";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateGroups: return "DegenerateGroups";
    case ErrorCode::TooFew: return "TooFew";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::InfeasibleConstraints: return "InfeasibleConstraints";
    case ErrorCode::InsufficientZips: return "InsufficientZips";
    case ErrorCode::InvalidSample: return "InvalidSample";
    case ErrorCode::ZeroImpressions: return "ZeroImpressions";
    case ErrorCode::CoverageInfeasible: return "CoverageInfeasible";
    case ErrorCode::SamplesExhausted: return "SamplesExhausted";
    case ErrorCode::MissingImage: return "MissingImage";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::BindFailure: return "BindFailure";
    case ErrorCode::ScenarioError: return "ScenarioError";
    case ErrorCode::MissingInputs: return "MissingInputs";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::Unauthorized: return "Unauthorized";
    case ErrorCode::ClientError: return "ClientError";
  }
  return "Unknown";
}

}  // namespace pairit
