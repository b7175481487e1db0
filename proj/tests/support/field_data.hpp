#pragma once

#include <string>
#include <vector>

#include "pairit/core/rng.hpp"
#include "pairit/fieldkit/sampling.hpp"

namespace pairit::testing {

// Synthetic ad pool shaped like the experiment's output: `teams` teams split
// between the arms, each submitting between minAds and maxAds ads with
// uniform 1..7 mean ratings. The first `flagged` ads are moderation-flagged.
inline std::vector<fieldkit::AdRecord> synthetic_ads(std::size_t teams, Rng& rng, std::size_t flagged = 0,
                                                     int minAds = 1, int maxAds = 12) {
  std::vector<fieldkit::AdRecord> ads;
  for (std::size_t t = 0; t < teams; ++t) {
    const Arm arm = t % 2 ? Arm::HumanAI : Arm::HumanHuman;
    const int n = minAds + static_cast<int>(rng.index(static_cast<std::uint64_t>(maxAds - minAds + 1)));
    for (int k = 0; k < n; ++k) {
      fieldkit::AdRecord a;
      a.adId = "ad-" + std::to_string(ads.size());
      a.teamId = "team-" + std::to_string(t);
      a.arm = arm;
      a.text = rng.uniform(1, 7);
      a.image = rng.uniform(1, 7);
      a.click = rng.uniform(1, 7);
      ads.push_back(std::move(a));
    }
  }
  // Spread the flags over distinct multi-ad teams so no team loses every ad.
  std::size_t marked = 0;
  for (std::size_t i = 1; i < ads.size() && marked < flagged; ++i) {
    if (ads[i].teamId == ads[i - 1].teamId && !ads[i - 1].flagged) {
      ads[i].flagged = true;
      ++marked;
      i += 20;
    }
  }
  return ads;
}

}  // namespace pairit::testing
