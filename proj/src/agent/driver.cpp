#include "pairit/agent/driver.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

#include "pairit/core/error.hpp"
#include "pairit/core/text.hpp"

namespace pairit::agent {

sync::ClientEdit replacement_edit(TextField field, const std::string& current,
                                  const std::string& replacement, std::uint64_t baseSeq) {
  const auto a = utf8_decode(current);
  const auto b = utf8_decode(replacement);
  std::size_t prefix = 0;
  while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
  std::size_t suffix = 0;
  while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
         a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix]) {
    ++suffix;
  }
  sync::ClientEdit edit;
  edit.field = field;
  edit.position = prefix;
  edit.deleted = utf8_encode(std::u32string_view(a).substr(prefix, a.size() - prefix - suffix));
  edit.inserted = utf8_encode(std::u32string_view(b).substr(prefix, b.size() - prefix - suffix));
  edit.baseSeq = baseSeq;
  return edit;
}

std::vector<Event> execute_action(const AgentAction& action, sync::Session& session,
                                  const std::string& agentId) {
  std::vector<Event> out;
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, act::Chat>) {
          out.push_back(session.set_typing(agentId, true));
          out.push_back(session.chat(agentId, k.text));
        } else if constexpr (std::is_same_v<T, act::EditText>) {
          const auto& state = session.state();
          auto edit = replacement_edit(k.field, state.draft.field(k.field), k.newContent, state.lastSeq);
          if (edit.deleted.empty() && edit.inserted.empty()) return;
          out.push_back(session.apply_text_edit(agentId, std::move(edit)));
        } else if constexpr (std::is_same_v<T, act::SelectImage>) {
          out.push_back(session.select_image(agentId, k.selection));
        } else if constexpr (std::is_same_v<T, act::GenerateImage>) {
          auto [request, result] = session.request_image_generation(agentId, k.prompt);
          out.push_back(std::move(request));
          out.push_back(std::move(result));
        }
      },
      action.kind);
  return out;
}

AgentDriver::AgentDriver(sync::Session& session, std::string agentId, CompletionRunner& runner,
                         AgentSettings settings, CanvasRenderer* renderer)
    : session_(session),
      agent_id_(std::move(agentId)),
      runner_(runner),
      settings_(std::move(settings)),
      renderer_(renderer ? renderer : &headless_) {
  if (settings_.tickMs <= 0) throw Error(ErrorCode::BadConfig, "agent tick period must be positive");
  subscription_ = session_.subscribe([this](const Event& e) { on_event(e); });
}

AgentDriver::~AgentDriver() { session_.unsubscribe(subscription_); }

void AgentDriver::on_event(const Event& e) {
  if (!affects_canvas(e)) return;
  try {
    auto snap = capture_canvas_snapshot(session_.state(), *renderer_);
    if (snap.snapshotId.empty()) spdlog::warn("{}: canvas render unavailable", agent_id_);
    session_.record(agent_id_, std::move(snap));
    ++stats_.snapshots;
  } catch (const std::exception& ex) {
    spdlog::warn("{}: snapshot not recorded: {}", agent_id_, ex.what());
  }
}

std::int64_t AgentDriver::next_wakeup_ms() const {
  std::int64_t next = session_.start_ms() + next_tick_elapsed_;
  if (auto due = runner_.due_ms()) next = std::min(next, *due);
  return next;
}

void AgentDriver::run_due() {
  const std::int64_t now = session_.start_ms() + session_.elapsed_ms();
  if (auto outcome = runner_.take(now)) deliver(*outcome);
  if (session_.elapsed_ms() >= next_tick_elapsed_) {
    tick();
    // a completion that is already done (e.g. an instant mock) lands within the tick
    if (auto outcome = runner_.take(session_.start_ms() + session_.elapsed_ms())) deliver(*outcome);
    const std::int64_t elapsed = session_.elapsed_ms();
    while (next_tick_elapsed_ <= elapsed) next_tick_elapsed_ += settings_.tickMs;
  }
}

void AgentDriver::tick() {
  if (!session_.active() || session_.elapsed_ms() >= session_.duration_ms()) {
    ++stats_.idleTicks;
    return;
  }
  ++stats_.ticks;
  if (runner_.busy()) {
    ++stats_.skippedBusy;
    return;
  }
  const auto ctx = build_context(session_.state(), agent_id_, settings_.taskText, settings_.features,
                                 session_.elapsed_ms());
  const auto prompt = build_prompt(ctx);
  ChatRequest request;
  request.model = settings_.model;
  request.system = prompt.system;
  request.user = prompt.user;
  request.imageUrl = prompt.image;
  request.schemaName = "agent_action";
  request.schema = action_schema();
  request.temperature = settings_.temperature;
  ++stats_.requests;
  runner_.start(std::move(request), session_.start_ms() + session_.elapsed_ms());
}

void AgentDriver::deliver(const CompletionOutcome& outcome) {
  if (!session_.active()) {
    ++stats_.discarded;
    return;
  }
  DecodeResult decoded;
  if (outcome.timedOut) {
    ++stats_.timeouts;
    decoded = {AgentAction{act::Wait{}, ""}, false, "ClientTimeout"};
  } else if (!outcome.content) {
    ++stats_.clientErrors;
    decoded = {AgentAction{act::Wait{}, ""}, false, outcome.error};
  } else {
    decoded = decode_action(*outcome.content);
    if (!decoded.ok) ++stats_.decodeFailures;
  }
  if (!decoded.ok) spdlog::warn("{}: decision falls back to Wait: {}", agent_id_, decoded.error);

  ev::AgentDecision record{std::string(decoded.action.name()), decoded.action.summary(),
                           decoded.action.reflection, !decoded.ok};
  if (!decoded.ok) record.summary = decoded.error;
  try {
    session_.record(agent_id_, std::move(record));
    ++stats_.decisions;
    execute_action(decoded.action, session_, agent_id_);
  } catch (const std::exception& ex) {
    ++stats_.actionFailures;
    spdlog::warn("{}: {} failed: {}", agent_id_, decoded.action.name(), ex.what());
  }
}

}  // namespace pairit::agent
