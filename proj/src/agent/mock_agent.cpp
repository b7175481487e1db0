#include "pairit/agent/mock_agent.hpp"

namespace pairit::agent {

ScriptedAgentClient::ScriptedAgentClient()
    : script_{
          {act::Chat{"Hi! I can draft a first headline and we can take it from there."}, "Open with a plan."},
          {act::EditText{TextField::Headline, "Where Do Your Tax Dollars Really Go?"}, "Lead with a question."},
          {act::SelectImage{StockImage{3}}, "The chart image fits a budget report."},
          {act::EditText{TextField::PrimaryText, "Our new report breaks down the federal budget in plain language."},
           "Say what the reader gets."},
          {act::Wait{}, "Give my partner room to edit."},
          {act::EditText{TextField::Description, "Free report. Five-minute read."}, "Short and concrete."},
          {act::Chat{"Looks good to me. Submit when you are happy and we can try another angle."},
           "Hand the submit decision to my partner."},
          {act::EditText{TextField::Headline, "The Budget, Explained in Five Minutes"}, "Try a second angle."},
          {act::GenerateImage{"A clean infographic of a federal budget pie chart, flat colors"},
           "A custom image could stand out."},
          {act::Wait{}, "Wait for feedback."},
      } {}

std::string ScriptedAgentClient::complete(const ChatRequest&) {
  const std::size_t k = calls_++;
  return encode_action(script_[k % script_.size()]);
}

}  // namespace pairit::agent
