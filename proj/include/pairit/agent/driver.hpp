#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pairit/agent/action.hpp"
#include "pairit/agent/canvas.hpp"
#include "pairit/agent/prompt.hpp"
#include "pairit/agent/runner.hpp"
#include "pairit/sync/session.hpp"

namespace pairit::agent {

// Diff of a full-field replacement into one contiguous delta (common prefix
// and suffix are kept).
sync::ClientEdit replacement_edit(TextField field, const std::string& current,
                                  const std::string& replacement, std::uint64_t baseSeq);

// Applies a decided action through the session. Wait produces no events.
// Sync-engine errors propagate.
std::vector<Event> execute_action(const AgentAction& action, sync::Session& session,
                                  const std::string& agentId);

struct AgentSettings {
  std::string taskText;
  std::string features;
  std::string model = "gpt-4o-2024-08-06";
  double temperature = 1.0;
  std::int64_t tickMs = 10'000;
};

struct AgentStats {
  std::size_t ticks = 0;          // tick instants while the session was active
  std::size_t skippedBusy = 0;    // ticks dropped because a completion was in flight
  std::size_t idleTicks = 0;      // ticks after the session ended
  std::size_t requests = 0;
  std::size_t decisions = 0;      // AgentDecision events recorded
  std::size_t decodeFailures = 0;
  std::size_t timeouts = 0;
  std::size_t clientErrors = 0;
  std::size_t actionFailures = 0;
  std::size_t discarded = 0;      // completions that arrived after the session ended
  std::size_t snapshots = 0;
};

// One per human-AI session. Ticks on a fixed period starting at session start,
// keeps at most one completion in flight, and records every decision before
// executing it.
class AgentDriver {
 public:
  AgentDriver(sync::Session& session, std::string agentId, CompletionRunner& runner,
              AgentSettings settings, CanvasRenderer* renderer = nullptr);
  ~AgentDriver();

  AgentDriver(const AgentDriver&) = delete;
  AgentDriver& operator=(const AgentDriver&) = delete;

  // Delivers a finished completion (if any), then fires every tick that is due.
  void run_due();
  // Next instant (session-clock ms) at which run_due has work.
  std::int64_t next_wakeup_ms() const;

  const AgentStats& stats() const { return stats_; }
  const std::string& agent_id() const { return agent_id_; }

 private:
  void tick();
  void deliver(const CompletionOutcome& outcome);
  void on_event(const Event& e);

  sync::Session& session_;
  std::string agent_id_;
  CompletionRunner& runner_;
  AgentSettings settings_;
  HeadlessRenderer headless_;
  CanvasRenderer* renderer_;
  std::size_t subscription_;
  std::int64_t next_tick_elapsed_ = 0;
  AgentStats stats_;
};

}  // namespace pairit::agent
