#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pairit/core/config.hpp"
#include "pairit/core/rng.hpp"
#include "pairit/core/types.hpp"

namespace pairit::match {

struct QueueEntry {
  std::string participantId;
  Arm arm = Arm::HumanHuman;
  std::int64_t enqueuedAt = 0;
  std::int64_t deadline = 0;
  // Human-AI entries wait in a simulated queue until this instant.
  std::int64_t readyAt = 0;
};

struct SessionPlan {
  std::string sessionId;
  Arm arm = Arm::HumanHuman;
  std::vector<std::string> humans;
  std::optional<std::string> agentId;
  std::int64_t startedAt = 0;
  SessionStatus status = SessionStatus::Active;
  double simulatedWaitSec = 0.0;
};

struct PairingDecision {
  std::vector<SessionPlan> sessions;
  bool empty() const { return sessions.empty(); }
};

enum class Subject { QueueEntry, Session };

struct StatusChange {
  Subject subject = Subject::Session;
  std::string id;  // participant id for queue entries, session id otherwise
  SessionStatus status = SessionStatus::Active;
  std::string cause;
  bool excludeFromAnalysis = false;
};

enum class AuditKind { Assign, Enqueue, Match, QueueTimeout, SessionEnd };

struct AuditRecord {
  AuditKind kind;
  std::int64_t t = 0;
  std::string subject;
  std::string detail;
};

// Single logical actor: all queue mutation funnels through these calls, in
// arrival order.
class Matchmaker {
 public:
  Matchmaker(ExperimentConfig config, Rng rng);

  // Throws AlreadyAssigned.
  Arm assign_arm(const std::string& participantId, std::int64_t now_ms);

  // Participant must be assigned and not already queued or in a live session.
  const QueueEntry& enqueue(const std::string& participantId, std::int64_t now_ms);

  // Human-human entries pair FIFO; human-AI entries match a fresh agent once
  // their simulated wait has elapsed.
  PairingDecision match(std::int64_t now_ms);

  // Removes queue entries whose deadline has passed.
  std::vector<StatusChange> handle_timeouts(std::int64_t now_ms);

  // A member left or timed out. Human-human sessions become Excluded; a human-AI
  // session cannot lose its partner and is closed as Completed.
  StatusChange handle_dropout(const std::string& sessionId, const std::string& actor,
                              const std::string& cause, std::int64_t now_ms);

  StatusChange complete(const std::string& sessionId, std::int64_t now_ms,
                        const std::string& cause = "Duration");

  std::optional<Arm> arm_of(const std::string& participantId) const;
  std::size_t queued() const { return queue_.size(); }
  const SessionPlan* session(const std::string& sessionId) const;
  bool in_active_session(const std::string& participantId) const;
  const std::vector<AuditRecord>& audit() const { return audit_; }
  const ExperimentConfig& config() const { return config_; }

 private:
  StatusChange close(const std::string& sessionId, SessionStatus status, const std::string& cause,
                     std::int64_t now_ms);

  ExperimentConfig config_;
  Rng rng_;
  std::map<std::string, Arm> assignments_;
  std::deque<QueueEntry> queue_;
  std::map<std::string, SessionPlan> sessions_;
  std::map<std::string, std::string> active_by_participant_;
  std::vector<AuditRecord> audit_;
  std::size_t next_session_ = 1;
};

}  // namespace pairit::match
