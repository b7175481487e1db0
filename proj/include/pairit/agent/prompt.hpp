#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pairit/core/replay.hpp"

namespace pairit::agent {

struct TimedAction {
  std::int64_t t = 0;  // ms
  std::string kind;
  std::string summary;
};

struct TimedReflection {
  std::int64_t t = 0;
  std::string text;
};

struct TimedChat {
  std::int64_t t = 0;
  std::string speaker;  // "Bot" or "User"
  std::string text;
};

// Everything the agent sees on one tick. Built from the replayed log only.
struct AgentContext {
  std::string taskText;
  std::string features;
  std::vector<Submission> submissionsHistory;
  AdDraft currentCopy;
  std::int64_t elapsedSeconds = 0;
  std::vector<TimedAction> actionHistory;
  std::vector<TimedReflection> reflectionHistory;
  std::vector<TimedChat> chatHistory;
  std::optional<std::string> latestCanvasSnapshot;  // image reference for the model
  bool snapshotUnavailable = false;
};

struct AgentPrompt {
  std::string system;
  std::string user;
  std::optional<std::string> image;
};

// The raw template, with ${...} placeholders.
std::string_view prompt_template();

// The reflection request sent as the user turn.
std::string_view reflection_request();

// `nowMs` is elapsed session time at the tick; the context clock never runs
// behind the latest logged event.
AgentContext build_context(const SessionState& state, const std::string& agentId,
                           const std::string& taskText, const std::string& features,
                           std::int64_t nowMs);

AgentPrompt build_prompt(const AgentContext& ctx);

// Fills ${name} placeholders in one pass; substituted values are never rescanned.
// Unknown names are left as-is.
std::string fill_template(std::string_view tmpl,
                          const std::vector<std::pair<std::string, std::string>>& values);

}  // namespace pairit::agent
