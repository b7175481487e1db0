#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pairit/core/rng.hpp"
#include "pairit/stats/tests.hpp"

namespace pairit::fieldkit {

struct ZipRow {
  std::string zip;
  double population = 0;
  double income = 0;
};

inline constexpr double kMinZipPopulation = 10'000;
inline constexpr double kMaxZipPopulation = 100'000;

// Inclusive on both ends.
bool zip_eligible(const ZipRow& z);

struct Campaign {
  std::string campaignId;
  std::vector<std::string> adIds;
  std::vector<std::string> zips;
  int window = 0;  // index of the two-day delivery slot
};

struct CampaignPlan {
  std::vector<Campaign> campaigns;
  std::uint64_t seed = 0;
};

struct AllocationOptions {
  std::size_t adsPerCampaign = 5;
  std::size_t zipsPerCampaign = 133;
  std::size_t campaignsPerWindow = 50;
};

// Shuffles the sample into campaigns of five and gives each campaign its own
// random set of eligible ZIP codes. Throws InvalidSample when the sample does
// not split evenly, InsufficientZips when the eligible pool is too small.
CampaignPlan allocate_campaigns(const std::vector<std::string>& sample, const std::vector<ZipRow>& zips,
                                std::uint64_t seed, const AllocationOptions& options = {});

struct BalanceReport {
  stats::Anova population;
  stats::Anova income;
};

// One-way ANOVA of ZIP population and income across campaigns.
BalanceReport balance_check(const CampaignPlan& plan, const std::vector<ZipRow>& zips);

// Synthetic ZIP table: log-normal population (a share falls outside the
// eligible range) and income loosely tied to population.
std::vector<ZipRow> synthetic_zip_table(std::size_t n, Rng& rng);

std::vector<ZipRow> load_zip_csv(const std::string& path);

}  // namespace pairit::fieldkit
