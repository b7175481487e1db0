#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "pairit/clients/clients.hpp"
#include "pairit/core/clock.hpp"

namespace pairit::agent {

struct CompletionOutcome {
  std::optional<std::string> content;
  std::string error;  // set when content is empty
  bool timedOut = false;
};

// Runs at most one chat completion at a time for a driver.
class CompletionRunner {
 public:
  virtual ~CompletionRunner() = default;
  virtual void start(ChatRequest request, std::int64_t nowMs) = 0;
  virtual bool busy() const = 0;
  // The finished outcome, once, if it is ready at nowMs.
  virtual std::optional<CompletionOutcome> take(std::int64_t nowMs) = 0;
  // When the in-flight completion will be ready, if the runner knows.
  virtual std::optional<std::int64_t> due_ms() const { return std::nullopt; }
};

// Deterministic runner for simulated time. The client is called at start();
// its result becomes visible `latency` ms later. A latency beyond the timeout
// yields a timed-out outcome at the timeout instant.
class SimulatedRunner final : public CompletionRunner {
 public:
  using LatencyFn = std::function<std::int64_t(std::size_t call)>;

  SimulatedRunner(ChatCompletionClient& client, std::int64_t latencyMs, std::int64_t timeoutMs);
  SimulatedRunner(ChatCompletionClient& client, LatencyFn latency, std::int64_t timeoutMs);

  void start(ChatRequest request, std::int64_t nowMs) override;
  bool busy() const override { return pending_.has_value(); }
  std::optional<CompletionOutcome> take(std::int64_t nowMs) override;
  std::optional<std::int64_t> due_ms() const override;

  std::size_t max_in_flight() const { return max_in_flight_; }

 private:
  ChatCompletionClient& client_;
  LatencyFn latency_;
  std::int64_t timeout_ms_;
  std::size_t calls_ = 0;
  std::optional<std::pair<std::int64_t, CompletionOutcome>> pending_;
  std::size_t max_in_flight_ = 0;
};

// Runs the client on a worker thread. A call that outlives the timeout is
// abandoned (its eventual result is dropped) and reported as timed out.
class ThreadedRunner final : public CompletionRunner {
 public:
  ThreadedRunner(ChatCompletionClient& client, std::int64_t timeoutMs);
  ~ThreadedRunner() override;

  void start(ChatRequest request, std::int64_t nowMs) override;
  bool busy() const override;
  std::optional<CompletionOutcome> take(std::int64_t nowMs) override;
  std::optional<std::int64_t> due_ms() const override;

 private:
  struct Slot;
  ChatCompletionClient& client_;
  std::int64_t timeout_ms_;
  std::shared_ptr<Slot> slot_;
  std::int64_t started_ms_ = 0;
};

}  // namespace pairit::agent
