#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <variant>

#include "pairit/core/types.hpp"

namespace pairit::agent {

namespace act {
struct Wait {
  bool operator==(const Wait&) const = default;
};
struct Chat {
  std::string text;
  bool operator==(const Chat&) const = default;
};
// Full-field replacement; executed as one single-span delta.
struct EditText {
  TextField field = TextField::Headline;
  std::string newContent;
  bool operator==(const EditText&) const = default;
};
struct SelectImage {
  ImageSelection selection;
  bool operator==(const SelectImage&) const = default;
};
struct GenerateImage {
  std::string prompt;
  bool operator==(const GenerateImage&) const = default;
};
}  // namespace act

// Closed action set; there is no way to express a submission.
using ActionKind = std::variant<act::Wait, act::Chat, act::EditText, act::SelectImage, act::GenerateImage>;

struct AgentAction {
  ActionKind kind = act::Wait{};
  std::string reflection;

  std::string_view name() const;
  std::string summary() const;
  bool operator==(const AgentAction&) const = default;
};

struct DecodeResult {
  AgentAction action;
  bool ok = true;
  std::string error;
};

// Strict JSON schema for the structured response.
const nlohmann::json& action_schema();

// Never throws: anything outside the schema decodes to Wait with ok == false.
DecodeResult decode_action(std::string_view content);

// Encodes an action in the response schema (used by scripted clients).
std::string encode_action(const AgentAction& action);

}  // namespace pairit::agent
