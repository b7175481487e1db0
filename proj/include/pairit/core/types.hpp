#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace pairit {

enum class Arm { HumanHuman, HumanAI };
enum class Role { Human, Agent };
enum class SessionStatus { Queued, Active, Completed, Excluded };
enum class TextField { Headline, PrimaryText, Description, ImagePrompt };
enum class Gender { Female, Male, Other };
enum class Employment { FullTime, PartTime, Unemployed, Student, Other };

inline constexpr int kStockImageCount = 7;
inline constexpr double kDefaultSessionSeconds = 2400.0;

std::string_view to_string(Arm a);
std::string_view to_string(Role r);
std::string_view to_string(SessionStatus s);
std::string_view to_string(TextField f);
std::string_view to_string(Gender g);
std::string_view to_string(Employment e);

Arm arm_from_string(std::string_view s);
Role role_from_string(std::string_view s);
SessionStatus status_from_string(std::string_view s);
TextField field_from_string(std::string_view s);
Gender gender_from_string(std::string_view s);
Employment employment_from_string(std::string_view s);

struct StockImage {
  int index = 0;
  bool operator==(const StockImage&) const = default;
};

struct GeneratedImage {
  std::string id;
  bool operator==(const GeneratedImage&) const = default;
};

using ImageSelection = std::variant<StockImage, GeneratedImage>;

// "stock:3" / "generated:<id>"
std::string image_ref(const ImageSelection& sel);
std::optional<ImageSelection> parse_image_ref(std::string_view ref);

struct AdDraft {
  std::string headline;
  std::string primaryText;
  std::string description;
  std::string imagePrompt;
  std::optional<ImageSelection> image;

  std::string& field(TextField f);
  const std::string& field(TextField f) const;

  // No copy text in any of the three ad-copy fields (after trimming).
  bool copy_empty() const;
  bool empty() const { return *this == AdDraft{}; }

  bool operator==(const AdDraft&) const = default;
};

struct Demographics {
  int age = 0;
  Gender gender = Gender::Other;
  Employment employment = Employment::Other;
};

struct Participant {
  std::string id;
  Demographics demographics;
  // openness, conscientiousness, extraversion, agreeableness, neuroticism; each in [0,1]
  std::array<double, 5> bigfive{};
  std::int64_t joinedAtMs = 0;
};

// Likert 1..7 answers mapped onto [0,1].
double normalize_likert(double score, int points = 7);

}  // namespace pairit
