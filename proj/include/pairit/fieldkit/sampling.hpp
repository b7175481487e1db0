#pragma once

#include <array>
#include <string>
#include <vector>

#include "pairit/core/rng.hpp"
#include "pairit/core/types.hpp"

namespace pairit::fieldkit {

struct AdRecord {
  std::string adId;
  std::string teamId;
  Arm arm = Arm::HumanHuman;
  double text = 4, image = 4, click = 4;  // mean human ratings, 1..7
  bool flagged = false;                   // moderation flag (input column)
};

inline constexpr int kStrata = 10;

struct StratifiedSample {
  std::vector<std::string> adIds;
  std::size_t removedFlagged = 0;
  // cell counts [arm][stratum]; arm index 0 = HumanHuman, 1 = HumanAI
  std::array<std::array<int, kStrata>, 2> cells{};
  std::array<int, 2> armTotals{};
};

// Stratum (0..9) of every ad within its arm: deciles of the click rating,
// ties broken by ad id. Flagged ads are excluded and get -1.
std::vector<int> click_strata(const std::vector<AdRecord>& ads);

// Removes flagged ads, then picks targetN ads so that every team contributes
// one or two, the two arms are as even as the team constraint allows, and each
// arm's ten click strata are balanced (within one when exact balance is
// impossible). Throws InfeasibleConstraints naming the binding constraint.
StratifiedSample stratified_sample(const std::vector<AdRecord>& ads, std::size_t targetN, Rng& rng);

}  // namespace pairit::fieldkit
