#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pairit/core/event_log.hpp"

namespace pairit {

struct ChatLine {
  std::int64_t t = 0;
  std::string actor;
  std::string text;
  bool operator==(const ChatLine&) const = default;
};

struct Submission {
  std::size_t index = 0;
  AdDraft ad;
  std::int64_t submittedAt = 0;
  std::uint64_t seq = 0;
  std::string actor;
  bool operator==(const Submission&) const = default;
};

// Per-actor work counters.
struct ActorCounts {
  std::size_t copyEdits = 0;
  std::size_t imageEdits = 0;
  std::size_t messages = 0;
  std::size_t imageGenRequests = 0;
  std::size_t imagesGenerated = 0;
  std::size_t submitConfirms = 0;
  std::size_t insertedChars = 0;
  std::size_t deletedChars = 0;
  bool operator==(const ActorCounts&) const = default;
};

struct AgentHistoryEntry {
  std::int64_t t = 0;
  std::string action;
  std::string summary;
  std::string reflection;
  bool decodeFailure = false;
  bool operator==(const AgentHistoryEntry&) const = default;
};

struct SessionState {
  std::uint64_t lastSeq = 0;
  std::int64_t lastT = 0;
  std::map<std::string, Role> members;
  std::set<std::string> departed;
  AdDraft draft;
  std::vector<ChatLine> chat;
  std::vector<Submission> submissions;
  std::map<std::string, ActorCounts> counts;
  std::vector<std::string> generatedImages;  // in arrival order
  std::map<std::string, std::string> openImageRequests;  // requestId -> requesting actor
  std::set<std::string> pendingConfirms;
  std::map<std::string, bool> typing;
  SessionStatus status = SessionStatus::Active;
  std::string statusCause;
  std::vector<AgentHistoryEntry> agentDecisions;
  std::optional<ev::CanvasSnapshot> latestSnapshot;
  bool snapshotUnavailable = false;
  std::map<std::string, std::map<std::string, nlohmann::json>> survey;

  bool has_generated(const std::string& id) const;
  std::vector<std::string> humans() const;
  std::optional<std::string> agent() const;
  bool is_agent(const std::string& actor) const;

  // Canonical serialization; identical states serialize to identical bytes.
  nlohmann::json to_json() const;
  bool operator==(const SessionState&) const = default;
};

enum class FindingKind {
  SequenceGap,
  TimeRegression,
  OutOfBounds,
  DeletedMismatch,
  EmptyEdit,
  MissingConfirmation,
  SnapshotMismatch,
  UnknownActor,
  DuplicateJoin,
  AgentSubmission,
  UnknownImage,
  UnknownRequest,
  EventAfterClose,
};

std::string_view to_string(FindingKind k);

struct Finding {
  FindingKind kind;
  std::uint64_t seq = 0;
  std::string detail;
};

struct ValidationReport {
  std::vector<Finding> findings;
  bool ok() const { return findings.empty(); }
  std::size_t count(FindingKind k) const;
};

// Applies events one at a time. A faulty event is recorded as a finding and its
// state effect is skipped; everything else is applied.
class StateMachine {
 public:
  // Returns false if the event produced findings.
  bool apply(const Event& e);

  const SessionState& state() const { return state_; }
  const std::vector<Finding>& findings() const { return findings_; }

 private:
  void finding(FindingKind k, const Event& e, std::string detail);
  void apply_text_edit(const Event& e, const ev::TextEdit& te);
  void clear_pending() { state_.pendingConfirms.clear(); }

  SessionState state_;
  std::vector<Finding> findings_;
  bool seen_any_ = false;
};

ValidationReport validate_log(const EventLog& log);

// Throws InvalidLog when validate_log reports findings.
SessionState replay(const EventLog& log);

// Applies one character delta to UTF-8 text; nullopt when out of bounds or
// when `deleted` does not match.
std::optional<std::string> apply_delta(const std::string& text, std::size_t position,
                                       const std::string& deleted, const std::string& inserted);

}  // namespace pairit
