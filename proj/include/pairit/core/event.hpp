#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <variant>

#include "pairit/core/types.hpp"

namespace pairit {

namespace ev {

struct Join {
  Role role = Role::Human;
  bool operator==(const Join&) const = default;
};
struct ChatMessage {
  std::string text;
  bool operator==(const ChatMessage&) const = default;
};
// Character-level delta: remove `deleted` at `position`, then insert `inserted` there.
// Positions count Unicode code points.
struct TextEdit {
  TextField field = TextField::Headline;
  std::size_t position = 0;
  std::string inserted;
  std::string deleted;
  bool operator==(const TextEdit&) const = default;
};
struct ImageSelect {
  ImageSelection selection;
  bool operator==(const ImageSelect&) const = default;
};
struct ImageGenRequest {
  std::string requestId;
  std::string prompt;
  bool operator==(const ImageGenRequest&) const = default;
};
struct ImageGenResult {
  std::string requestId;
  std::string imageId;
  bool operator==(const ImageGenResult&) const = default;
};
struct ImageGenFailed {
  std::string requestId;
  std::string reason;
  bool operator==(const ImageGenFailed&) const = default;
};
struct TypingIndicator {
  bool on = false;
  bool operator==(const TypingIndicator&) const = default;
};
struct SubmitConfirm {
  bool operator==(const SubmitConfirm&) const = default;
};
struct SubmissionFinalized {
  AdDraft ad;
  bool operator==(const SubmissionFinalized&) const = default;
};
struct SurveyAnswer {
  std::string item;
  nlohmann::json value;
  bool operator==(const SurveyAnswer&) const = default;
};
struct Leave {
  bool operator==(const Leave&) const = default;
};
struct Timeout {
  bool operator==(const Timeout&) const = default;
};
struct StatusChange {
  SessionStatus status = SessionStatus::Active;
  std::string cause;
  bool operator==(const StatusChange&) const = default;
};
// The agent's decision for one tick, with its chain-of-thought reflection.
struct AgentDecision {
  std::string action;
  std::string summary;
  std::string reflection;
  bool decodeFailure = false;
  bool operator==(const AgentDecision&) const = default;
};
struct CanvasSnapshot {
  std::string snapshotId;  // empty when rendering failed
  std::string imageRef;
  bool operator==(const CanvasSnapshot&) const = default;
};
// Reserved for swipe/scroll capture; no metric consumes it.
struct UiGesture {
  std::string gesture;
  bool operator==(const UiGesture&) const = default;
};

}  // namespace ev

using EventPayload =
    std::variant<ev::Join, ev::ChatMessage, ev::TextEdit, ev::ImageSelect, ev::ImageGenRequest,
                 ev::ImageGenResult, ev::ImageGenFailed, ev::TypingIndicator, ev::SubmitConfirm,
                 ev::SubmissionFinalized, ev::SurveyAnswer, ev::Leave, ev::Timeout,
                 ev::StatusChange, ev::AgentDecision, ev::CanvasSnapshot, ev::UiGesture>;

struct Event {
  std::uint64_t seq = 0;
  std::int64_t t = 0;  // ms since session start
  std::string actor;
  EventPayload payload;

  std::string_view kind() const;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&payload);
  }

  bool operator==(const Event&) const = default;
};

nlohmann::json to_json(const AdDraft& d);
AdDraft draft_from_json(const nlohmann::json& j);

// {"seq", "t", "actor", "kind", "payload"}
nlohmann::json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

std::string to_jsonl_line(const Event& e);
Event parse_jsonl_line(std::string_view line);

}  // namespace pairit
