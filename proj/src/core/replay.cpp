#include "pairit/core/replay.hpp"

#include <algorithm>

#include "pairit/core/error.hpp"
#include "pairit/core/text.hpp"

namespace pairit {

std::string_view to_string(FindingKind k) {
  switch (k) {
    case FindingKind::SequenceGap: return "SequenceGap";
    case FindingKind::TimeRegression: return "TimeRegression";
    case FindingKind::OutOfBounds: return "OutOfBounds";
    case FindingKind::DeletedMismatch: return "DeletedMismatch";
    case FindingKind::EmptyEdit: return "EmptyEdit";
    case FindingKind::MissingConfirmation: return "MissingConfirmation";
    case FindingKind::SnapshotMismatch: return "SnapshotMismatch";
    case FindingKind::UnknownActor: return "UnknownActor";
    case FindingKind::DuplicateJoin: return "DuplicateJoin";
    case FindingKind::AgentSubmission: return "AgentSubmission";
    case FindingKind::UnknownImage: return "UnknownImage";
    case FindingKind::UnknownRequest: return "UnknownRequest";
    case FindingKind::EventAfterClose: return "EventAfterClose";
  }
  return "Unknown";
}

std::size_t ValidationReport::count(FindingKind k) const {
  return static_cast<std::size_t>(
      std::count_if(findings.begin(), findings.end(), [k](const Finding& f) { return f.kind == k; }));
}

bool SessionState::has_generated(const std::string& id) const {
  return std::find(generatedImages.begin(), generatedImages.end(), id) != generatedImages.end();
}

std::vector<std::string> SessionState::humans() const {
  std::vector<std::string> out;
  for (const auto& [id, role] : members) {
    if (role == Role::Human) out.push_back(id);
  }
  return out;
}

std::optional<std::string> SessionState::agent() const {
  for (const auto& [id, role] : members) {
    if (role == Role::Agent) return id;
  }
  return std::nullopt;
}

bool SessionState::is_agent(const std::string& actor) const {
  auto it = members.find(actor);
  return it != members.end() && it->second == Role::Agent;
}

nlohmann::json SessionState::to_json() const {
  using nlohmann::json;
  json j;
  j["lastSeq"] = lastSeq;
  j["lastT"] = lastT;
  json mem = json::object();
  for (const auto& [id, role] : members) mem[id] = to_string(role);
  j["members"] = mem;
  j["departed"] = departed;
  j["draft"] = pairit::to_json(draft);
  json chatj = json::array();
  for (const auto& c : chat) chatj.push_back({{"t", c.t}, {"actor", c.actor}, {"text", c.text}});
  j["chat"] = chatj;
  json subs = json::array();
  for (const auto& s : submissions) {
    subs.push_back({{"index", s.index},
                    {"ad", pairit::to_json(s.ad)},
                    {"submittedAt", s.submittedAt},
                    {"seq", s.seq},
                    {"actor", s.actor}});
  }
  j["submissions"] = subs;
  json cnt = json::object();
  for (const auto& [id, c] : counts) {
    cnt[id] = {{"copyEdits", c.copyEdits},         {"imageEdits", c.imageEdits},
               {"messages", c.messages},           {"imageGenRequests", c.imageGenRequests},
               {"imagesGenerated", c.imagesGenerated}, {"submitConfirms", c.submitConfirms},
               {"insertedChars", c.insertedChars}, {"deletedChars", c.deletedChars}};
  }
  j["counts"] = cnt;
  j["generatedImages"] = generatedImages;
  j["openImageRequests"] = openImageRequests;
  j["pendingConfirms"] = pendingConfirms;
  j["typing"] = typing;
  j["status"] = to_string(status);
  j["statusCause"] = statusCause;
  json dec = json::array();
  for (const auto& d : agentDecisions) {
    dec.push_back({{"t", d.t},
                   {"action", d.action},
                   {"summary", d.summary},
                   {"reflection", d.reflection},
                   {"decodeFailure", d.decodeFailure}});
  }
  j["agentDecisions"] = dec;
  j["latestSnapshot"] = latestSnapshot ? json{{"snapshotId", latestSnapshot->snapshotId},
                                              {"imageRef", latestSnapshot->imageRef}}
                                       : json(nullptr);
  j["snapshotUnavailable"] = snapshotUnavailable;
  j["survey"] = survey;
  return j;
}

std::optional<std::string> apply_delta(const std::string& text, std::size_t position,
                                       const std::string& deleted, const std::string& inserted) {
  auto chars = utf8_decode(text);
  const auto del = utf8_decode(deleted);
  if (position > chars.size() || position + del.size() > chars.size()) return std::nullopt;
  if (chars.compare(position, del.size(), del) != 0) return std::nullopt;
  chars.replace(position, del.size(), utf8_decode(inserted));
  return utf8_encode(chars);
}

void StateMachine::finding(FindingKind k, const Event& e, std::string detail) {
  findings_.push_back(Finding{k, e.seq, std::move(detail)});
}

void StateMachine::apply_text_edit(const Event& e, const ev::TextEdit& te) {
  if (te.inserted.empty() && te.deleted.empty()) {
    finding(FindingKind::EmptyEdit, e, "edit inserts and deletes nothing");
    return;
  }
  auto& text = state_.draft.field(te.field);
  const auto len = char_count(text);
  if (te.position > len || te.position + char_count(te.deleted) > len) {
    finding(FindingKind::OutOfBounds, e,
            "edit at " + std::to_string(te.position) + " beyond field length " + std::to_string(len));
    return;
  }
  auto next = apply_delta(text, te.position, te.deleted, te.inserted);
  if (!next) {
    finding(FindingKind::DeletedMismatch, e, "deleted text does not match field content");
    return;
  }
  text = std::move(*next);
  auto& c = state_.counts[e.actor];
  ++c.copyEdits;
  c.insertedChars += char_count(te.inserted);
  c.deletedChars += char_count(te.deleted);
  clear_pending();
}

bool StateMachine::apply(const Event& e) {
  const auto before = findings_.size();

  if (seen_any_ && e.seq != state_.lastSeq + 1) {
    finding(FindingKind::SequenceGap, e,
            "expected seq " + std::to_string(state_.lastSeq + 1) + ", got " + std::to_string(e.seq));
  } else if (!seen_any_ && e.seq != 1) {
    finding(FindingKind::SequenceGap, e, "log must start at seq 1");
  }
  if (seen_any_ && e.t < state_.lastT) {
    finding(FindingKind::TimeRegression, e, "t decreased");
  }
  seen_any_ = true;
  state_.lastSeq = e.seq;
  state_.lastT = std::max(state_.lastT, e.t);

  const bool is_join = e.as<ev::Join>() != nullptr;
  // status transitions and the duration timeout are server-issued
  const bool is_status = e.as<ev::StatusChange>() != nullptr || e.as<ev::Timeout>() != nullptr;
  if (!is_join && !is_status && !state_.members.contains(e.actor)) {
    finding(FindingKind::UnknownActor, e, "actor '" + e.actor + "' has not joined");
    return false;
  }

  const bool closed = state_.status != SessionStatus::Active;
  const bool allowed_after_close = e.as<ev::SurveyAnswer>() || e.as<ev::Leave>() || is_status ||
                                   e.as<ev::TypingIndicator>() || e.as<ev::AgentDecision>();
  if (closed && !allowed_after_close) {
    finding(FindingKind::EventAfterClose, e, std::string(e.kind()) + " after session closed");
    return false;
  }

  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ev::Join>) {
          if (state_.members.contains(e.actor)) {
            finding(FindingKind::DuplicateJoin, e, "actor joined twice");
          } else {
            state_.members[e.actor] = p.role;
            state_.counts[e.actor];
          }
        } else if constexpr (std::is_same_v<T, ev::ChatMessage>) {
          state_.chat.push_back(ChatLine{e.t, e.actor, p.text});
          ++state_.counts[e.actor].messages;
          state_.typing[e.actor] = false;
        } else if constexpr (std::is_same_v<T, ev::TextEdit>) {
          apply_text_edit(e, p);
        } else if constexpr (std::is_same_v<T, ev::ImageSelect>) {
          if (const auto* s = std::get_if<StockImage>(&p.selection)) {
            if (s->index < 0 || s->index >= kStockImageCount) {
              finding(FindingKind::OutOfBounds, e, "stock index out of range");
              return;
            }
          } else if (!state_.has_generated(std::get<GeneratedImage>(p.selection).id)) {
            finding(FindingKind::UnknownImage, e, "generated image not in session");
            return;
          }
          state_.draft.image = p.selection;
          ++state_.counts[e.actor].imageEdits;
          clear_pending();
        } else if constexpr (std::is_same_v<T, ev::ImageGenRequest>) {
          state_.openImageRequests[p.requestId] = e.actor;
          ++state_.counts[e.actor].imageGenRequests;
        } else if constexpr (std::is_same_v<T, ev::ImageGenResult>) {
          auto it = state_.openImageRequests.find(p.requestId);
          if (it == state_.openImageRequests.end()) {
            finding(FindingKind::UnknownRequest, e, "result for unknown request " + p.requestId);
            return;
          }
          ++state_.counts[it->second].imagesGenerated;
          state_.openImageRequests.erase(it);
          if (!state_.has_generated(p.imageId)) state_.generatedImages.push_back(p.imageId);
          state_.draft.image = GeneratedImage{p.imageId};
          clear_pending();
        } else if constexpr (std::is_same_v<T, ev::ImageGenFailed>) {
          if (state_.openImageRequests.erase(p.requestId) == 0) {
            finding(FindingKind::UnknownRequest, e, "failure for unknown request " + p.requestId);
          }
        } else if constexpr (std::is_same_v<T, ev::TypingIndicator>) {
          state_.typing[e.actor] = p.on;
        } else if constexpr (std::is_same_v<T, ev::SubmitConfirm>) {
          if (state_.is_agent(e.actor)) {
            finding(FindingKind::AgentSubmission, e, "agent confirmed a submission");
            return;
          }
          state_.pendingConfirms.insert(e.actor);
          ++state_.counts[e.actor].submitConfirms;
        } else if constexpr (std::is_same_v<T, ev::SubmissionFinalized>) {
          if (state_.is_agent(e.actor)) {
            finding(FindingKind::AgentSubmission, e, "agent finalized a submission");
            return;
          }
          for (const auto& h : state_.humans()) {
            if (!state_.pendingConfirms.contains(h)) {
              finding(FindingKind::MissingConfirmation, e, "no confirmation from " + h);
            }
          }
          if (!(p.ad == state_.draft)) {
            finding(FindingKind::SnapshotMismatch, e, "snapshot differs from replayed draft");
          }
          if (findings_.size() != before) return;
          state_.submissions.push_back(
              Submission{state_.submissions.size(), p.ad, e.t, e.seq, e.actor});
          state_.draft = AdDraft{};
          clear_pending();
        } else if constexpr (std::is_same_v<T, ev::SurveyAnswer>) {
          state_.survey[e.actor][p.item] = p.value;
        } else if constexpr (std::is_same_v<T, ev::Leave>) {
          state_.departed.insert(e.actor);
          state_.typing[e.actor] = false;
        } else if constexpr (std::is_same_v<T, ev::Timeout>) {
          // informational; the status transition is its own event
        } else if constexpr (std::is_same_v<T, ev::StatusChange>) {
          state_.status = p.status;
          state_.statusCause = p.cause;
        } else if constexpr (std::is_same_v<T, ev::AgentDecision>) {
          state_.agentDecisions.push_back(
              AgentHistoryEntry{e.t, p.action, p.summary, p.reflection, p.decodeFailure});
        } else if constexpr (std::is_same_v<T, ev::CanvasSnapshot>) {
          if (p.snapshotId.empty()) {
            state_.snapshotUnavailable = true;
          } else {
            state_.latestSnapshot = p;
            state_.snapshotUnavailable = false;
          }
        } else if constexpr (std::is_same_v<T, ev::UiGesture>) {
        }
      },
      e.payload);

  return findings_.size() == before;
}

ValidationReport validate_log(const EventLog& log) {
  StateMachine sm;
  for (const auto& e : log.events()) sm.apply(e);
  return ValidationReport{sm.findings()};
}

SessionState replay(const EventLog& log) {
  StateMachine sm;
  for (const auto& e : log.events()) sm.apply(e);
  if (!sm.findings().empty()) {
    const auto& f = sm.findings().front();
    throw Error(ErrorCode::InvalidLog, std::string(to_string(f.kind)) + " at seq " +
                                           std::to_string(f.seq) + ": " + f.detail);
  }
  return sm.state();
}

}  // namespace pairit
