#include "pairit/core/types.hpp"

#include "pairit/core/error.hpp"
#include "pairit/core/text.hpp"

namespace pairit {

std::string_view to_string(Arm a) {
  return a == Arm::HumanAI ? "HumanAI" : "HumanHuman";
}

std::string_view to_string(Role r) { return r == Role::Agent ? "agent" : "human"; }

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Queued: return "Queued";
    case SessionStatus::Active: return "Active";
    case SessionStatus::Completed: return "Completed";
    case SessionStatus::Excluded: return "Excluded";
  }
  return "Active";
}

std::string_view to_string(TextField f) {
  switch (f) {
    case TextField::Headline: return "headline";
    case TextField::PrimaryText: return "primaryText";
    case TextField::Description: return "description";
    case TextField::ImagePrompt: return "imagePrompt";
  }
  return "headline";
}

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::Female: return "female";
    case Gender::Male: return "male";
    case Gender::Other: return "other";
  }
  return "other";
}

std::string_view to_string(Employment e) {
  switch (e) {
    case Employment::FullTime: return "full-time";
    case Employment::PartTime: return "part-time";
    case Employment::Unemployed: return "unemployed";
    case Employment::Student: return "student";
    case Employment::Other: return "other";
  }
  return "other";
}

Arm arm_from_string(std::string_view s) {
  if (s == "HumanAI") return Arm::HumanAI;
  if (s == "HumanHuman") return Arm::HumanHuman;
  throw Error(ErrorCode::InvalidEvent, "unknown arm '" + std::string(s) + "'");
}

Role role_from_string(std::string_view s) {
  if (s == "human") return Role::Human;
  if (s == "agent") return Role::Agent;
  throw Error(ErrorCode::InvalidEvent, "unknown role '" + std::string(s) + "'");
}

SessionStatus status_from_string(std::string_view s) {
  if (s == "Queued") return SessionStatus::Queued;
  if (s == "Active") return SessionStatus::Active;
  if (s == "Completed") return SessionStatus::Completed;
  if (s == "Excluded") return SessionStatus::Excluded;
  throw Error(ErrorCode::InvalidEvent, "unknown status '" + std::string(s) + "'");
}

TextField field_from_string(std::string_view s) {
  if (s == "headline") return TextField::Headline;
  if (s == "primaryText") return TextField::PrimaryText;
  if (s == "description") return TextField::Description;
  if (s == "imagePrompt") return TextField::ImagePrompt;
  throw Error(ErrorCode::InvalidEvent, "unknown text field '" + std::string(s) + "'");
}

Gender gender_from_string(std::string_view s) {
  if (s == "female") return Gender::Female;
  if (s == "male") return Gender::Male;
  return Gender::Other;
}

Employment employment_from_string(std::string_view s) {
  if (s == "full-time") return Employment::FullTime;
  if (s == "part-time") return Employment::PartTime;
  if (s == "unemployed") return Employment::Unemployed;
  if (s == "student") return Employment::Student;
  return Employment::Other;
}

std::string image_ref(const ImageSelection& sel) {
  if (const auto* s = std::get_if<StockImage>(&sel)) return "stock:" + std::to_string(s->index);
  return "generated:" + std::get<GeneratedImage>(sel).id;
}

std::optional<ImageSelection> parse_image_ref(std::string_view ref) {
  constexpr std::string_view kStock = "stock:";
  constexpr std::string_view kGen = "generated:";
  if (ref.starts_with(kStock)) {
    const auto digits = ref.substr(kStock.size());
    if (digits.empty() || digits.size() > 3) return std::nullopt;
    int idx = 0;
    for (char c : digits) {
      if (c < '0' || c > '9') return std::nullopt;
      idx = idx * 10 + (c - '0');
    }
    return StockImage{idx};
  }
  if (ref.starts_with(kGen) && ref.size() > kGen.size()) {
    return GeneratedImage{std::string(ref.substr(kGen.size()))};
  }
  return std::nullopt;
}

std::string& AdDraft::field(TextField f) {
  switch (f) {
    case TextField::Headline: return headline;
    case TextField::PrimaryText: return primaryText;
    case TextField::Description: return description;
    case TextField::ImagePrompt: return imagePrompt;
  }
  return headline;
}

const std::string& AdDraft::field(TextField f) const {
  return const_cast<AdDraft*>(this)->field(f);
}

bool AdDraft::copy_empty() const {
  return trim(headline).empty() && trim(primaryText).empty() && trim(description).empty();
}

double normalize_likert(double score, int points) {
  return (score - 1.0) / static_cast<double>(points - 1);
}

}  // namespace pairit
