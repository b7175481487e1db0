#include "pairit/agent/action.hpp"

#include "pairit/core/error.hpp"
#include "pairit/core/text.hpp"

namespace pairit::agent {

namespace {

using nlohmann::json;

constexpr const char* kReflectionKeys[] = {"user_engagement", "copy_progress", "task_progress",
                                           "next_step"};

json string_prop() { return {{"type", "string"}}; }

}  // namespace

std::string_view AgentAction::name() const {
  return std::visit(
      [](const auto& k) -> std::string_view {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, act::Wait>) return "Wait";
        if constexpr (std::is_same_v<T, act::Chat>) return "Chat";
        if constexpr (std::is_same_v<T, act::EditText>) return "EditText";
        if constexpr (std::is_same_v<T, act::SelectImage>) return "SelectImage";
        if constexpr (std::is_same_v<T, act::GenerateImage>) return "GenerateImage";
      },
      kind);
}

std::string AgentAction::summary() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, act::Wait>) return "waited";
        if constexpr (std::is_same_v<T, act::Chat>) return k.text;
        if constexpr (std::is_same_v<T, act::EditText>) {
          return std::string(to_string(k.field)) + " -> \"" + k.newContent + "\"";
        }
        if constexpr (std::is_same_v<T, act::SelectImage>) return image_ref(k.selection);
        if constexpr (std::is_same_v<T, act::GenerateImage>) return k.prompt;
      },
      kind);
}

const json& action_schema() {
  static const json schema = [] {
    json reflection_props = json::object();
    json reflection_req = json::array();
    for (const char* k : kReflectionKeys) {
      reflection_props[k] = string_prop();
      reflection_req.push_back(k);
    }
    return json{
        {"type", "object"},
        {"properties",
         {{"reflection",
           {{"type", "object"},
            {"properties", reflection_props},
            {"required", reflection_req},
            {"additionalProperties", false}}},
          {"action",
           {{"type", "string"},
            {"enum", {"Wait", "Chat", "EditText", "SelectImage", "GenerateImage"}}}},
          {"chat_text", string_prop()},
          {"field",
           {{"type", "string"}, {"enum", {"", "headline", "primaryText", "description", "imagePrompt"}}}},
          {"new_content", string_prop()},
          {"image", string_prop()},
          {"image_prompt", string_prop()}}},
        {"required",
         {"reflection", "action", "chat_text", "field", "new_content", "image", "image_prompt"}},
        {"additionalProperties", false}};
  }();
  return schema;
}

DecodeResult decode_action(std::string_view content) {
  auto fail = [](std::string why) { return DecodeResult{AgentAction{act::Wait{}, ""}, false, std::move(why)}; };
  json j = json::parse(content, nullptr, false);
  if (j.is_discarded()) return fail("response is not JSON");
  if (!j.is_object()) return fail("response is not an object");

  auto str = [&](const char* key) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return std::nullopt;
    return it->get<std::string>();
  };

  AgentAction out;
  if (auto it = j.find("reflection"); it != j.end()) {
    if (it->is_string()) {
      out.reflection = it->get<std::string>();
    } else if (it->is_object()) {
      std::string text;
      for (const char* k : kReflectionKeys) {
        auto r = it->find(k);
        if (r == it->end()) continue;
        if (!r->is_string()) return fail(std::string("reflection.") + k + " is not a string");
        if (!text.empty()) text += "\n";
        text += std::string(k) + ": " + r->get<std::string>();
      }
      out.reflection = text;
    } else {
      return fail("reflection has the wrong type");
    }
  }

  const auto action = str("action");
  if (!action) return fail("missing action");
  if (*action == "Wait") {
    out.kind = act::Wait{};
  } else if (*action == "Chat") {
    const auto text = str("chat_text");
    if (!text || trim(*text).empty()) return fail("Chat without chat_text");
    out.kind = act::Chat{*text};
  } else if (*action == "EditText") {
    const auto field = str("field");
    const auto content_text = str("new_content");
    if (!field || !content_text) return fail("EditText without field/new_content");
    try {
      out.kind = act::EditText{field_from_string(*field), *content_text};
    } catch (const Error&) {
      return fail("EditText with unknown field '" + *field + "'");
    }
  } else if (*action == "SelectImage") {
    const auto ref = str("image");
    if (!ref) return fail("SelectImage without image");
    auto sel = parse_image_ref(*ref);
    if (!sel) {
      // bare stock index, e.g. "3"
      if (ref->size() == 1 && (*ref)[0] >= '0' && (*ref)[0] <= '9') sel = StockImage{(*ref)[0] - '0'};
    }
    if (auto* stock = sel ? std::get_if<StockImage>(&*sel) : nullptr;
        stock && (stock->index < 0 || stock->index >= kStockImageCount)) {
      sel.reset();
    }
    if (!sel) return fail("SelectImage with bad image '" + *ref + "'");
    out.kind = act::SelectImage{*sel};
  } else if (*action == "GenerateImage") {
    const auto prompt = str("image_prompt");
    if (!prompt || trim(*prompt).empty()) return fail("GenerateImage without image_prompt");
    out.kind = act::GenerateImage{*prompt};
  } else {
    return fail("action '" + *action + "' is not in the action set");
  }
  return DecodeResult{out, true, ""};
}

std::string encode_action(const AgentAction& action) {
  json j = {{"reflection",
             {{"user_engagement", action.reflection},
              {"copy_progress", ""},
              {"task_progress", ""},
              {"next_step", ""}}},
            {"action", action.name()},
            {"chat_text", ""},
            {"field", ""},
            {"new_content", ""},
            {"image", ""},
            {"image_prompt", ""}};
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, act::Chat>) j["chat_text"] = k.text;
        if constexpr (std::is_same_v<T, act::EditText>) {
          j["field"] = to_string(k.field);
          j["new_content"] = k.newContent;
        }
        if constexpr (std::is_same_v<T, act::SelectImage>) j["image"] = image_ref(k.selection);
        if constexpr (std::is_same_v<T, act::GenerateImage>) j["image_prompt"] = k.prompt;
      },
      action.kind);
  return j.dump();
}

}  // namespace pairit::agent
