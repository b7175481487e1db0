#include "pairit/core/event.hpp"

#include "pairit/core/error.hpp"

namespace pairit {

namespace {

using nlohmann::json;

template <typename>
constexpr std::string_view kind_name = "";
template <> constexpr std::string_view kind_name<ev::Join> = "Join";
template <> constexpr std::string_view kind_name<ev::ChatMessage> = "ChatMessage";
template <> constexpr std::string_view kind_name<ev::TextEdit> = "TextEdit";
template <> constexpr std::string_view kind_name<ev::ImageSelect> = "ImageSelect";
template <> constexpr std::string_view kind_name<ev::ImageGenRequest> = "ImageGenRequest";
template <> constexpr std::string_view kind_name<ev::ImageGenResult> = "ImageGenResult";
template <> constexpr std::string_view kind_name<ev::ImageGenFailed> = "ImageGenFailed";
template <> constexpr std::string_view kind_name<ev::TypingIndicator> = "TypingIndicator";
template <> constexpr std::string_view kind_name<ev::SubmitConfirm> = "SubmitConfirm";
template <> constexpr std::string_view kind_name<ev::SubmissionFinalized> = "SubmissionFinalized";
template <> constexpr std::string_view kind_name<ev::SurveyAnswer> = "SurveyAnswer";
template <> constexpr std::string_view kind_name<ev::Leave> = "Leave";
template <> constexpr std::string_view kind_name<ev::Timeout> = "Timeout";
template <> constexpr std::string_view kind_name<ev::StatusChange> = "SessionStatus";
template <> constexpr std::string_view kind_name<ev::AgentDecision> = "AgentDecision";
template <> constexpr std::string_view kind_name<ev::CanvasSnapshot> = "CanvasSnapshot";
template <> constexpr std::string_view kind_name<ev::UiGesture> = "UiGesture";

json payload_json(const ev::Join& p) { return {{"role", to_string(p.role)}}; }
json payload_json(const ev::ChatMessage& p) { return {{"text", p.text}}; }
json payload_json(const ev::TextEdit& p) {
  return {{"field", to_string(p.field)},
          {"position", p.position},
          {"inserted", p.inserted},
          {"deleted", p.deleted}};
}
json payload_json(const ev::ImageSelect& p) { return {{"selection", image_ref(p.selection)}}; }
json payload_json(const ev::ImageGenRequest& p) {
  return {{"requestId", p.requestId}, {"prompt", p.prompt}};
}
json payload_json(const ev::ImageGenResult& p) {
  return {{"requestId", p.requestId}, {"imageId", p.imageId}};
}
json payload_json(const ev::ImageGenFailed& p) {
  return {{"requestId", p.requestId}, {"reason", p.reason}};
}
json payload_json(const ev::TypingIndicator& p) { return {{"on", p.on}}; }
json payload_json(const ev::SubmitConfirm&) { return json::object(); }
json payload_json(const ev::SubmissionFinalized& p) { return {{"ad", to_json(p.ad)}}; }
json payload_json(const ev::SurveyAnswer& p) { return {{"item", p.item}, {"value", p.value}}; }
json payload_json(const ev::Leave&) { return json::object(); }
json payload_json(const ev::Timeout&) { return json::object(); }
json payload_json(const ev::StatusChange& p) {
  return {{"status", to_string(p.status)}, {"cause", p.cause}};
}
json payload_json(const ev::AgentDecision& p) {
  return {{"action", p.action},
          {"summary", p.summary},
          {"reflection", p.reflection},
          {"decodeFailure", p.decodeFailure}};
}
json payload_json(const ev::CanvasSnapshot& p) {
  return {{"snapshotId", p.snapshotId}, {"imageRef", p.imageRef}};
}
json payload_json(const ev::UiGesture& p) { return {{"gesture", p.gesture}}; }

const json& req(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::InvalidEvent, std::string("missing field '") + key + "'");
  return *it;
}

ImageSelection selection_from(const json& j) {
  auto sel = parse_image_ref(j.get<std::string>());
  if (!sel) throw Error(ErrorCode::InvalidEvent, "bad image selection " + j.dump());
  return *sel;
}

EventPayload payload_from(std::string_view kind, const json& p) {
  if (kind == "Join") return ev::Join{role_from_string(req(p, "role").get<std::string>())};
  if (kind == "ChatMessage") return ev::ChatMessage{req(p, "text").get<std::string>()};
  if (kind == "TextEdit") {
    return ev::TextEdit{field_from_string(req(p, "field").get<std::string>()),
                        req(p, "position").get<std::size_t>(), req(p, "inserted").get<std::string>(),
                        req(p, "deleted").get<std::string>()};
  }
  if (kind == "ImageSelect") return ev::ImageSelect{selection_from(req(p, "selection"))};
  if (kind == "ImageGenRequest") {
    return ev::ImageGenRequest{req(p, "requestId").get<std::string>(),
                               req(p, "prompt").get<std::string>()};
  }
  if (kind == "ImageGenResult") {
    return ev::ImageGenResult{req(p, "requestId").get<std::string>(),
                              req(p, "imageId").get<std::string>()};
  }
  if (kind == "ImageGenFailed") {
    return ev::ImageGenFailed{req(p, "requestId").get<std::string>(),
                              req(p, "reason").get<std::string>()};
  }
  if (kind == "TypingIndicator") return ev::TypingIndicator{req(p, "on").get<bool>()};
  if (kind == "SubmitConfirm") return ev::SubmitConfirm{};
  if (kind == "SubmissionFinalized") return ev::SubmissionFinalized{draft_from_json(req(p, "ad"))};
  if (kind == "SurveyAnswer") return ev::SurveyAnswer{req(p, "item").get<std::string>(), req(p, "value")};
  if (kind == "Leave") return ev::Leave{};
  if (kind == "Timeout") return ev::Timeout{};
  if (kind == "SessionStatus") {
    return ev::StatusChange{status_from_string(req(p, "status").get<std::string>()),
                            req(p, "cause").get<std::string>()};
  }
  if (kind == "AgentDecision") {
    return ev::AgentDecision{req(p, "action").get<std::string>(), req(p, "summary").get<std::string>(),
                             req(p, "reflection").get<std::string>(),
                             req(p, "decodeFailure").get<bool>()};
  }
  if (kind == "CanvasSnapshot") {
    return ev::CanvasSnapshot{req(p, "snapshotId").get<std::string>(),
                              req(p, "imageRef").get<std::string>()};
  }
  if (kind == "UiGesture") return ev::UiGesture{req(p, "gesture").get<std::string>()};
  throw Error(ErrorCode::InvalidEvent, "unknown event kind '" + std::string(kind) + "'");
}

}  // namespace

std::string_view Event::kind() const {
  return std::visit([](const auto& p) { return kind_name<std::decay_t<decltype(p)>>; }, payload);
}

json to_json(const AdDraft& d) {
  return {{"headline", d.headline},
          {"primaryText", d.primaryText},
          {"description", d.description},
          {"imagePrompt", d.imagePrompt},
          {"image", d.image ? json(image_ref(*d.image)) : json(nullptr)}};
}

AdDraft draft_from_json(const json& j) {
  AdDraft d;
  d.headline = req(j, "headline").get<std::string>();
  d.primaryText = req(j, "primaryText").get<std::string>();
  d.description = req(j, "description").get<std::string>();
  d.imagePrompt = req(j, "imagePrompt").get<std::string>();
  const auto& img = req(j, "image");
  if (!img.is_null()) d.image = selection_from(img);
  return d;
}

json to_json(const Event& e) {
  return {{"seq", e.seq},
          {"t", e.t},
          {"actor", e.actor},
          {"kind", e.kind()},
          {"payload", std::visit([](const auto& p) { return payload_json(p); }, e.payload)}};
}

Event event_from_json(const json& j) {
  try {
    Event e;
    e.seq = req(j, "seq").get<std::uint64_t>();
    e.t = req(j, "t").get<std::int64_t>();
    e.actor = req(j, "actor").get<std::string>();
    e.payload = payload_from(req(j, "kind").get<std::string>(), req(j, "payload"));
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::InvalidEvent, ex.what());
  }
}

std::string to_jsonl_line(const Event& e) { return to_json(e).dump(); }

Event parse_jsonl_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& ex) {
    throw Error(ErrorCode::InvalidEvent, ex.what());
  }
  return event_from_json(j);
}

}  // namespace pairit
