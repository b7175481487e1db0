#include "pairit/match/matchmaker.hpp"

#include <algorithm>
#include <cstdio>

#include "pairit/core/clock.hpp"
#include "pairit/core/error.hpp"

namespace pairit::match {

Matchmaker::Matchmaker(ExperimentConfig config, Rng rng)
    : config_(std::move(config)), rng_(std::move(rng)) {
  config_.validate();
}

Arm Matchmaker::assign_arm(const std::string& participantId, std::int64_t now_ms) {
  if (assignments_.contains(participantId)) {
    throw Error(ErrorCode::AlreadyAssigned, participantId);
  }
  const Arm arm = rng_.bernoulli(config_.pHumanAI) ? Arm::HumanAI : Arm::HumanHuman;
  assignments_.emplace(participantId, arm);
  audit_.push_back({AuditKind::Assign, now_ms, participantId, std::string(to_string(arm))});
  return arm;
}

const QueueEntry& Matchmaker::enqueue(const std::string& participantId, std::int64_t now_ms) {
  auto it = assignments_.find(participantId);
  if (it == assignments_.end()) throw Error(ErrorCode::NotAssigned, participantId);
  const bool queued = std::any_of(queue_.begin(), queue_.end(), [&](const QueueEntry& q) {
    return q.participantId == participantId;
  });
  if (queued || active_by_participant_.contains(participantId)) {
    throw Error(ErrorCode::AlreadyQueued, participantId);
  }
  QueueEntry e;
  e.participantId = participantId;
  e.arm = it->second;
  e.enqueuedAt = now_ms;
  e.deadline = now_ms + std::max<std::int64_t>(1, seconds_to_ms(config_.queueTimeoutSec));
  if (e.arm == Arm::HumanAI) {
    const double wait = rng_.uniform(config_.simQueueMinSec, config_.simQueueMaxSec);
    e.readyAt = now_ms + seconds_to_ms(wait);
  }
  queue_.push_back(e);
  audit_.push_back({AuditKind::Enqueue, now_ms, participantId, std::string(to_string(e.arm))});
  return queue_.back();
}

PairingDecision Matchmaker::match(std::int64_t now_ms) {
  PairingDecision out;
  auto new_id = [this] {
    char buf[32];
    std::snprintf(buf, sizeof buf, "session-%05zu", next_session_++);
    return std::string(buf);
  };

  std::deque<QueueEntry> rest;
  std::optional<QueueEntry> waiting_hh;
  for (auto& e : queue_) {
    if (e.arm == Arm::HumanAI) {
      if (e.readyAt > now_ms) {
        rest.push_back(e);
        continue;
      }
      SessionPlan s;
      s.sessionId = new_id();
      s.arm = Arm::HumanAI;
      s.humans = {e.participantId};
      s.agentId = "agent-" + s.sessionId;
      s.startedAt = now_ms;
      s.simulatedWaitSec = static_cast<double>(e.readyAt - e.enqueuedAt) / 1000.0;
      out.sessions.push_back(s);
      continue;
    }
    if (!waiting_hh) {
      waiting_hh = e;
      continue;
    }
    SessionPlan s;
    s.sessionId = new_id();
    s.arm = Arm::HumanHuman;
    s.humans = {waiting_hh->participantId, e.participantId};
    s.startedAt = now_ms;
    out.sessions.push_back(s);
    waiting_hh.reset();
  }
  if (waiting_hh) {
    // keep FIFO position of the unpaired entry
    auto pos = std::find_if(rest.begin(), rest.end(), [&](const QueueEntry& q) {
      return q.enqueuedAt > waiting_hh->enqueuedAt;
    });
    rest.insert(pos, *waiting_hh);
  }
  queue_ = std::move(rest);

  for (const auto& s : out.sessions) {
    sessions_[s.sessionId] = s;
    for (const auto& h : s.humans) {
      active_by_participant_[h] = s.sessionId;
      audit_.push_back({AuditKind::Match, now_ms, h, s.sessionId});
    }
  }
  return out;
}

std::vector<StatusChange> Matchmaker::handle_timeouts(std::int64_t now_ms) {
  std::vector<StatusChange> out;
  std::deque<QueueEntry> rest;
  for (auto& e : queue_) {
    if (e.deadline <= now_ms) {
      out.push_back({Subject::QueueEntry, e.participantId, SessionStatus::Excluded, "QueueTimeout", true});
      audit_.push_back({AuditKind::QueueTimeout, now_ms, e.participantId, "removed"});
    } else {
      rest.push_back(e);
    }
  }
  queue_ = std::move(rest);
  return out;
}

StatusChange Matchmaker::close(const std::string& sessionId, SessionStatus status,
                               const std::string& cause, std::int64_t now_ms) {
  auto it = sessions_.find(sessionId);
  if (it == sessions_.end()) throw Error(ErrorCode::SessionNotActive, sessionId);
  auto& s = it->second;
  if (s.status == SessionStatus::Active) {
    s.status = status;
    for (const auto& h : s.humans) active_by_participant_.erase(h);
    audit_.push_back({AuditKind::SessionEnd, now_ms, sessionId,
                      std::string(to_string(status)) + ":" + cause});
  }
  return {Subject::Session, sessionId, s.status, cause, s.status == SessionStatus::Excluded};
}

StatusChange Matchmaker::handle_dropout(const std::string& sessionId, const std::string& actor,
                                        const std::string& cause, std::int64_t now_ms) {
  auto it = sessions_.find(sessionId);
  if (it == sessions_.end()) throw Error(ErrorCode::SessionNotActive, sessionId);
  const auto& s = it->second;
  if (s.status != SessionStatus::Active) {
    return {Subject::Session, sessionId, s.status, cause, s.status == SessionStatus::Excluded};
  }
  if (s.arm == Arm::HumanHuman) return close(sessionId, SessionStatus::Excluded, cause + ":" + actor, now_ms);
  return close(sessionId, SessionStatus::Completed, cause + ":" + actor, now_ms);
}

StatusChange Matchmaker::complete(const std::string& sessionId, std::int64_t now_ms,
                                  const std::string& cause) {
  return close(sessionId, SessionStatus::Completed, cause, now_ms);
}

std::optional<Arm> Matchmaker::arm_of(const std::string& participantId) const {
  auto it = assignments_.find(participantId);
  if (it == assignments_.end()) return std::nullopt;
  return it->second;
}

const SessionPlan* Matchmaker::session(const std::string& sessionId) const {
  auto it = sessions_.find(sessionId);
  return it == sessions_.end() ? nullptr : &it->second;
}

bool Matchmaker::in_active_session(const std::string& participantId) const {
  return active_by_participant_.contains(participantId);
}

}  // namespace pairit::match
