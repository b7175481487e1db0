#pragma once

#include <atomic>
#include <vector>

#include "pairit/agent/action.hpp"
#include "pairit/clients/clients.hpp"

namespace pairit::agent {

// Offline stand-in for the agent model. Replies with a fixed script of actions,
// one per call, cycling when the script runs out. Edits are whole-field
// rewrites, so every one of them lands as a single block insert.
class ScriptedAgentClient final : public ChatCompletionClient {
 public:
  ScriptedAgentClient();  // a short brainstorming script
  explicit ScriptedAgentClient(std::vector<AgentAction> script) : script_(std::move(script)) {}

  std::string complete(const ChatRequest& request) override;
  std::size_t calls() const { return calls_; }

 private:
  std::vector<AgentAction> script_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace pairit::agent
