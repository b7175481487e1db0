#include "pairit/agent/runner.hpp"

#include <mutex>
#include <thread>

namespace pairit::agent {

namespace {

CompletionOutcome call_client(ChatCompletionClient& client, const ChatRequest& request) {
  CompletionOutcome out;
  try {
    out.content = client.complete(request);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

SimulatedRunner::SimulatedRunner(ChatCompletionClient& client, std::int64_t latencyMs,
                                 std::int64_t timeoutMs)
    : SimulatedRunner(client, [latencyMs](std::size_t) { return latencyMs; }, timeoutMs) {}

SimulatedRunner::SimulatedRunner(ChatCompletionClient& client, LatencyFn latency,
                                 std::int64_t timeoutMs)
    : client_(client), latency_(std::move(latency)), timeout_ms_(timeoutMs) {}

void SimulatedRunner::start(ChatRequest request, std::int64_t nowMs) {
  const std::size_t in_flight = pending_ ? 2 : 1;
  if (in_flight > max_in_flight_) max_in_flight_ = in_flight;
  const std::int64_t latency = latency_(calls_++);
  CompletionOutcome out;
  if (latency > timeout_ms_) {
    out.timedOut = true;
    out.error = "ClientTimeout";
    pending_.emplace(nowMs + timeout_ms_, std::move(out));
  } else {
    pending_.emplace(nowMs + latency, call_client(client_, request));
  }
}

std::optional<CompletionOutcome> SimulatedRunner::take(std::int64_t nowMs) {
  if (!pending_ || pending_->first > nowMs) return std::nullopt;
  auto out = std::move(pending_->second);
  pending_.reset();
  return out;
}

std::optional<std::int64_t> SimulatedRunner::due_ms() const {
  if (!pending_) return std::nullopt;
  return pending_->first;
}

struct ThreadedRunner::Slot {
  std::mutex mu;
  std::optional<CompletionOutcome> result;
};

ThreadedRunner::ThreadedRunner(ChatCompletionClient& client, std::int64_t timeoutMs)
    : client_(client), timeout_ms_(timeoutMs) {}

ThreadedRunner::~ThreadedRunner() = default;

void ThreadedRunner::start(ChatRequest request, std::int64_t nowMs) {
  auto slot = std::make_shared<Slot>();
  slot_ = slot;
  started_ms_ = nowMs;
  // Detached: an abandoned call keeps only its own slot alive.
  std::thread([slot, &client = client_, request = std::move(request)] {
    auto out = call_client(client, request);
    std::lock_guard lock(slot->mu);
    slot->result = std::move(out);
  }).detach();
}

bool ThreadedRunner::busy() const { return slot_ != nullptr; }

std::optional<CompletionOutcome> ThreadedRunner::take(std::int64_t nowMs) {
  if (!slot_) return std::nullopt;
  {
    std::lock_guard lock(slot_->mu);
    if (slot_->result) {
      auto out = std::move(*slot_->result);
      slot_->result.reset();
      slot_.reset();
      return out;
    }
  }
  if (nowMs - started_ms_ >= timeout_ms_) {
    slot_.reset();
    CompletionOutcome out;
    out.timedOut = true;
    out.error = "ClientTimeout";
    return out;
  }
  return std::nullopt;
}

std::optional<std::int64_t> ThreadedRunner::due_ms() const {
  if (!slot_) return std::nullopt;
  return started_ms_ + timeout_ms_;
}

}  // namespace pairit::agent
