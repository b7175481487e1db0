#include "pairit/analytics/labels.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>

#include "pairit/core/error.hpp"
#include "pairit/core/text.hpp"

namespace pairit::analytics {

namespace {

constexpr std::string_view kSystem = R"PROMPT(
    You are an expert at analyzing collaborative conversations.
    For each message, label it with structured categories to reflect the conversation dynamics accurately.
    Output the results in JSON format.

    Label Categories:
    - CategoryLabel:
        - Content: The message shares information, facts, or deliverables directly related to the task.
        - Process: The message addresses strategies or approaches to performing the task and real-time organizational or logistical details for the session.
        - Social: The message builds rapport or contains social interactions not directly related to the task.
        - Emotional: The message expresses emotions or attitudes related to the session or task.
        - Feedback: The message provides constructive feedback or evaluative comments on the task.
    )PROMPT";

constexpr std::string_view kUser = R"PROMPT(
    Label the message using the CategoryLabel options above.

    <message>{message}</message>
    )PROMPT";

constexpr std::string_view kPlaceholder = "{message}";

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view to_string(MessageLabel l) {
  switch (l) {
    case MessageLabel::Content: return "Content";
    case MessageLabel::Process: return "Process";
    case MessageLabel::Social: return "Social";
    case MessageLabel::Emotional: return "Emotional";
    case MessageLabel::Feedback: return "Feedback";
    case MessageLabel::Other: return "Other";
  }
  return "Other";
}

std::optional<MessageLabel> label_from_string(std::string_view s) {
  for (auto l : kAllLabels) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

std::string_view label_system_prompt() { return kSystem; }

std::string label_user_prompt(std::string_view message) {
  std::string out(kUser);
  out.replace(out.find(kPlaceholder), kPlaceholder.size(), message);
  return out;
}

const nlohmann::json& label_schema() {
  static const nlohmann::json schema = [] {
    nlohmann::json names = nlohmann::json::array();
    for (auto l : kAllLabels) names.push_back(to_string(l));
    return nlohmann::json{{"type", "object"},
                          {"properties", {{"category_label", {{"type", "string"}, {"enum", names}}}}},
                          {"required", {"category_label"}},
                          {"additionalProperties", false}};
  }();
  return schema;
}

ChatRequest label_request(std::string_view message) {
  ChatRequest r;
  r.model = kLabelModel;
  r.system = std::string(kSystem);
  r.user = label_user_prompt(message);
  r.schemaName = "Label";
  r.schema = label_schema();
  r.temperature = 1.0;
  return r;
}

MessageLabel label_message(std::string_view text, ChatCompletionClient& client) {
  if (trim(std::string(text)).empty()) throw Error(ErrorCode::EmptyPrompt, "cannot label an empty message");
  const auto reply = client.complete(label_request(text));
  const auto j = nlohmann::json::parse(reply, nullptr, false);
  if (j.is_object()) {
    auto it = j.find("category_label");
    if (it != j.end() && it->is_string()) {
      if (auto l = label_from_string(it->get<std::string>())) return *l;
    }
  }
  spdlog::warn("label decode failure, using Other: {}", reply);
  return MessageLabel::Other;
}

MessageLabel KeywordLabelClient::classify(std::string_view message) {
  const auto m = lower(message);
  auto has = [&](std::initializer_list<std::string_view> words) {
    return std::any_of(words.begin(), words.end(), [&](std::string_view w) { return m.find(w) != std::string::npos; });
  };
  if (has({"sorry", "coffee", "hello", "hey", "hi ", "how are you", "nice to meet", "where are you", "weekend"}))
    return MessageLabel::Social;
  if (has({"love", "excited", "frustrat", "annoy", "happy", "fun", "lol", "haha", "ugh"}))
    return MessageLabel::Emotional;
  if (has({"let's", "lets ", "divide", "i'll", "you do", "should we", "submit", "next", "time left", "first"}))
    return MessageLabel::Process;
  if (has({"good", "great", "better", "nice", "not sure about", "too long", "i like", "works"}))
    return MessageLabel::Feedback;
  if (has({"headline", "image", "description", "text", "report", "ad", "copy", "data"}))
    return MessageLabel::Content;
  return MessageLabel::Other;
}

std::string KeywordLabelClient::complete(const ChatRequest& request) {
  const auto open = request.user.find("<message>");
  const auto close = request.user.rfind("</message>");
  std::string_view message;
  if (open != std::string::npos && close != std::string::npos && close >= open + 9) {
    message = std::string_view(request.user).substr(open + 9, close - open - 9);
  }
  return nlohmann::json{{"category_label", to_string(classify(message))}}.dump();
}

void label_session(const std::string& sessionId, const EventLog& log, ChatCompletionClient& client,
                   LabelTable& table) {
  for (const auto& e : log.events()) {
    const auto* chat = e.as<ev::ChatMessage>();
    if (!chat) continue;
    MessageKey key{sessionId, e.seq};
    if (table.contains(key)) continue;
    table[key] = trim(chat->text).empty() ? MessageLabel::Other : label_message(chat->text, client);
  }
}

std::optional<std::pair<double, double>> communication_fractions(const std::vector<MessageLabel>& labels) {
  if (labels.empty()) return std::nullopt;
  std::size_t task = 0, inter = 0;
  for (auto l : labels) {
    if (l == MessageLabel::Content || l == MessageLabel::Process) ++task;
    if (l == MessageLabel::Social || l == MessageLabel::Emotional) ++inter;
  }
  const double n = static_cast<double>(labels.size());
  return std::make_pair(task / n, inter / n);
}

}  // namespace pairit::analytics
