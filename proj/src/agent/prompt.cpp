#include "pairit/agent/prompt.hpp"

#include <algorithm>

namespace pairit::agent {

namespace {

constexpr std::string_view kTemplate = R"PROMPT(<Definitions>
<Action/> - The action taken by you, the "Bot". These include 'Wait', 'Chat', 'EditText', 'SelectImage', and 'GenerateImage'. These are provided in the action history and includes the timestamp (t=) of each action.
<Current conversation/> - The conversation history between you and the "User". This includes the timestamp (t=) of each chat message. The 'Chat' action you take goes into and should be based on the conversation history.
<Current copy/> - The current ad copy you are working on. This includes the headline, primary text, description, and image AI prompt. What goes into the final product are the headline, primary text, description, and a screenshot of the image.
<Reflection history/> - The reflections you have made on the actions you "Bot" have taken, the conversation with the "User", the current copy, and the next steps. These are provided in the reflection history and includes the timestamp (t=) of each reflection. These are not shown to the "User". They are only for your internal evaluation. Examine if the "User" is engaged, if the ad copy is improving, and if the task is being completed.
<Action history/> - The actions you "Bot" have taken. These are not by "User". These include the action type and the timestamp (t=) of each action. These are provided in the action history.
</Definitions>

<Submission history>
These submission cannot be altered.
${submissions}
</Submission history>

<Your features>
${features}
</Your features>

<Current task>
${task}
</Current task>

<Current copy>
<Headline>
  ${headline}
</Headline>
<Primary text>
  ${primaryText}
</Primary text>
<Description>
  ${description}
</Description>
<Image prompt>
  ${imageAIPrompt}
</Image prompt>
</Current copy>

<Elapsed time in seconds>
${elapsedTime}
</Elapsed time in seconds>

<Bot action history>
${actionHistory}
</Bot action history>

<Reflection history>
${reflections}
</Reflection history>

<Current conversation>
  ${messageHistoryText}
</Current conversation>

<Instructions>
You are "Bot", working on a collaborative task with a human partner "User" via texting. Your focus is to complete the assignment. You and the human partner would get paid.

For chats, emulate the informality of a text conversation. You may use lower case or texting shorthands like "nah" or "lol". So keep your responses short when appropriate. Do not reveal you are an AI. Pretend you are a human.

Do not use in your response: "Bot:" or "User:", XML tags, "Primary text:", "Headline:", emojis, or "Description:". Do not use markdown.

You are "Bot". Do not generate the same chat messages. Do not repeat the same actions except for "Wait". Wait to give "User" the time to process. If "User" is silent, you can prompt them with a question or a suggestion.

Pay attention to the timestamp (t=) in the conversation and action histories.

When you 'Chat', you should respond based on the conversation history.

When you 'EditText', you should make edits to the current copy based on the task, the current conversation, and the current copy. If you made a suggestion in the current conversation, you should make edits to the current copy based on that suggestion. The 'Primary Text' should be short, one sentence max. The 'Description' can be slightly longer, but still concise.

When you 'SelectImage', you should select an image based on the task, the current conversation, and the current copy. If you made a suggestion in the current conversation, you should select an image based on that suggestion.

When you 'GenerateImage', you should generate an image based on the task, the current conversation, and the current copy. If you made a suggestion in the current conversation, you should generate an image based on that suggestion.

DO NOT TAKE ANY ACTION WITHOUT CONSULTING "USER". PROMPT "USER" FOR CONFIRMATION BEFORE EACH ACTION.
You can delegate the action to "User" by asking them to take the action.
Explain what you are planning to take action on before you do it. Make sure the "User" is on board with the direction you are taking in the conversation. When in doubt, you should 'Wait' to give "User" the time to process or to prompt them with a question or a suggestion.

DO NOT REPEAT ACTIONS, NOT EVEN SIMILAR ACTIONS.

To engage user, chat with them. Ask questions. Make suggestions. Provide feedback. Make sure the user is engaged in the conversation. If the user is silent, prompt them with a question or a suggestion. If the user is not engaged, you should 'Wait' to give the user time to process or to prompt them with a question or a suggestion. Prioritize user engagement over actions.
</Instructions>)PROMPT";

constexpr std::string_view kReflectionRequest =
    "Before acting, reflect on the collaboration so far:\n"
    "1. Is the \"User\" engaged?\n"
    "2. Is the ad copy improving?\n"
    "3. Is the task being completed?\n"
    "4. What is the next step?\n"
    "Then choose exactly one action: Wait, Chat, EditText, SelectImage or GenerateImage. "
    "Reply in the required JSON format. Leave fields that do not apply to your action empty.";

std::string stamp(std::int64_t ms) { return "t=" + std::to_string(ms / 1000); }

std::string or_none(std::string s) { return s.empty() ? "None" : s; }

}  // namespace

std::string_view prompt_template() { return kTemplate; }
std::string_view reflection_request() { return kReflectionRequest; }

std::string fill_template(std::string_view tmpl,
                          const std::vector<std::pair<std::string, std::string>>& values) {
  std::string out;
  out.reserve(tmpl.size() * 2);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const std::size_t open = tmpl.find("${", i);
    if (open == std::string_view::npos) break;
    const std::size_t close = tmpl.find('}', open + 2);
    if (close == std::string_view::npos) break;
    out.append(tmpl.substr(i, open - i));
    const std::string_view name = tmpl.substr(open + 2, close - open - 2);
    auto it = std::find_if(values.begin(), values.end(), [&](const auto& kv) { return kv.first == name; });
    if (it == values.end()) {
      out.append(tmpl.substr(open, close + 1 - open));
    } else {
      out.append(it->second);
    }
    i = close + 1;
  }
  out.append(tmpl.substr(i));
  return out;
}

AgentContext build_context(const SessionState& state, const std::string& agentId,
                           const std::string& taskText, const std::string& features,
                           std::int64_t nowMs) {
  AgentContext ctx;
  ctx.taskText = taskText;
  ctx.features = features;
  ctx.submissionsHistory = state.submissions;
  ctx.currentCopy = state.draft;
  ctx.elapsedSeconds = std::max(nowMs, state.lastT) / 1000;
  for (const auto& d : state.agentDecisions) {
    ctx.actionHistory.push_back({d.t, d.action, d.summary});
    if (!d.reflection.empty()) ctx.reflectionHistory.push_back({d.t, d.reflection});
  }
  for (const auto& line : state.chat) {
    ctx.chatHistory.push_back({line.t, line.actor == agentId ? "Bot" : "User", line.text});
  }
  if (state.latestSnapshot && !state.latestSnapshot->snapshotId.empty()) {
    ctx.latestCanvasSnapshot = "snapshot:" + state.latestSnapshot->snapshotId;
  }
  ctx.snapshotUnavailable = state.snapshotUnavailable;
  return ctx;
}

AgentPrompt build_prompt(const AgentContext& ctx) {
  std::string submissions;
  for (const auto& s : ctx.submissionsHistory) {
    if (!submissions.empty()) submissions += "\n";
    submissions += "Submission " + std::to_string(s.index + 1) + " (" + stamp(s.submittedAt) + "):\n";
    submissions += "  " + s.ad.headline + "\n";
    submissions += "  " + s.ad.primaryText + "\n";
    submissions += "  " + s.ad.description + "\n";
    submissions += "  image: " + (s.ad.image ? image_ref(*s.ad.image) : std::string("none"));
  }

  std::string actions;
  for (const auto& a : ctx.actionHistory) {
    if (!actions.empty()) actions += "\n";
    actions += stamp(a.t) + " " + a.kind;
    if (a.kind != "Wait") actions += ": " + a.summary;
  }

  std::string reflections;
  for (const auto& r : ctx.reflectionHistory) {
    if (!reflections.empty()) reflections += "\n";
    reflections += stamp(r.t) + " " + r.text;
  }

  std::string chat;
  for (const auto& c : ctx.chatHistory) {
    if (!chat.empty()) chat += "\n  ";
    chat += stamp(c.t) + " " + c.speaker + ": " + c.text;
  }

  AgentPrompt prompt;
  prompt.system = fill_template(kTemplate, {{"submissions", or_none(submissions)},
                                            {"features", ctx.features},
                                            {"task", ctx.taskText},
                                            {"headline", ctx.currentCopy.headline},
                                            {"primaryText", ctx.currentCopy.primaryText},
                                            {"description", ctx.currentCopy.description},
                                            {"imageAIPrompt", ctx.currentCopy.imagePrompt},
                                            {"elapsedTime", std::to_string(ctx.elapsedSeconds)},
                                            {"actionHistory", actions},
                                            {"reflections", reflections},
                                            {"messageHistoryText", chat}});
  prompt.user = std::string(kReflectionRequest);
  if (ctx.snapshotUnavailable) prompt.user += "\n(The image preview could not be captured this time.)";
  prompt.image = ctx.latestCanvasSnapshot;
  return prompt;
}

}  // namespace pairit::agent
