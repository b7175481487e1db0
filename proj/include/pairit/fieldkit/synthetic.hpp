#pragma once

#include <cstdint>
#include <filesystem>

namespace pairit::fieldkit {

struct SyntheticFieldOptions {
  std::size_t teams = 1751;
  std::size_t flagged = 8;
  std::size_t sampleSize = 2000;
  std::size_t zipRows = 70'000;
  double meanImpressions = 2466;  // per ad
  double baseCtrPct = 0.15;
  double haiCtrEffect = 0.0;      // percentage points added for human-AI ads
  double clickRatingCtrSlope = 0.01;
};

// Writes a complete synthetic field run into dir: ads.csv (ratings and flags),
// zips.csv, sample.csv, plan.csv, delivery.csv and views.csv. Delivered ads are
// the stratified sample, allocated to campaigns with random ZIP sets.
void synthesize_field_data(const std::filesystem::path& dir, std::uint64_t seed,
                           const SyntheticFieldOptions& options = {});

}  // namespace pairit::fieldkit
