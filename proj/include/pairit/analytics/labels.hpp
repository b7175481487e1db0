#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pairit/clients/clients.hpp"
#include "pairit/core/event_log.hpp"

namespace pairit::analytics {

enum class MessageLabel { Content, Process, Social, Emotional, Feedback, Other };

inline constexpr MessageLabel kAllLabels[] = {MessageLabel::Content, MessageLabel::Process,
                                              MessageLabel::Social,  MessageLabel::Emotional,
                                              MessageLabel::Feedback, MessageLabel::Other};

std::string_view to_string(MessageLabel l);
std::optional<MessageLabel> label_from_string(std::string_view s);

inline constexpr const char* kLabelModel = "gpt-4o-mini-2024-07-18";

// The labeling prompts. The user prompt embeds the message between
// <message> tags.
std::string_view label_system_prompt();
std::string label_user_prompt(std::string_view message);
const nlohmann::json& label_schema();

ChatRequest label_request(std::string_view message);

// One schema-constrained completion per message. Anything that does not decode
// to a known category becomes Other (and is logged). Throws EmptyPrompt for
// blank text.
MessageLabel label_message(std::string_view text, ChatCompletionClient& client);

// Offline labeler: keyword rules applied to the message inside the prompt.
// Deterministic, and good enough to exercise the pipeline end to end.
class KeywordLabelClient final : public ChatCompletionClient {
 public:
  std::string complete(const ChatRequest& request) override;
  static MessageLabel classify(std::string_view message);
};

struct MessageKey {
  std::string sessionId;
  std::uint64_t seq = 0;
  auto operator<=>(const MessageKey&) const = default;
};

using LabelTable = std::map<MessageKey, MessageLabel>;

// Labels every chat message in the log. Existing entries are kept, so a table
// can be filled incrementally.
void label_session(const std::string& sessionId, const EventLog& log, ChatCompletionClient& client,
                   LabelTable& table);

// Fractions of task-oriented (Content + Process) and interpersonal
// (Social + Emotional) labels. nullopt for an empty list.
std::optional<std::pair<double, double>> communication_fractions(const std::vector<MessageLabel>& labels);

}  // namespace pairit::analytics
