#include "pairit/fieldkit/campaigns.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_map>

#include "pairit/core/error.hpp"
#include "pairit/stats/models.hpp"

namespace pairit::fieldkit {

bool zip_eligible(const ZipRow& z) {
  return z.population >= kMinZipPopulation && z.population <= kMaxZipPopulation;
}

CampaignPlan allocate_campaigns(const std::vector<std::string>& sample, const std::vector<ZipRow>& zips,
                                std::uint64_t seed, const AllocationOptions& options) {
  if (options.adsPerCampaign == 0 || sample.size() % options.adsPerCampaign != 0) {
    throw Error(ErrorCode::InvalidSample, std::to_string(sample.size()) + " ads do not split into campaigns of " +
                                              std::to_string(options.adsPerCampaign));
  }
  if (std::set<std::string>(sample.begin(), sample.end()).size() != sample.size()) {
    throw Error(ErrorCode::InvalidSample, "duplicate ad in sample");
  }
  const std::size_t C = sample.size() / options.adsPerCampaign;
  std::vector<std::size_t> eligible;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < zips.size(); ++i) {
    if (zip_eligible(zips[i]) && seen.insert(zips[i].zip).second) eligible.push_back(i);
  }
  if (eligible.size() < C * options.zipsPerCampaign) {
    throw Error(ErrorCode::InsufficientZips, std::to_string(eligible.size()) + " eligible ZIPs for " +
                                                 std::to_string(C) + " campaigns of " +
                                                 std::to_string(options.zipsPerCampaign));
  }

  Rng rng(seed);
  Rng ad_rng = rng.split(1), zip_rng = rng.split(2);
  std::vector<std::string> ads = sample;
  ad_rng.shuffle(std::span(ads));
  zip_rng.shuffle(std::span(eligible));

  CampaignPlan plan;
  plan.seed = seed;
  for (std::size_t c = 0; c < C; ++c) {
    Campaign cam;
    char id[32];
    std::snprintf(id, sizeof id, "campaign-%03zu", c + 1);
    cam.campaignId = id;
    cam.adIds.assign(ads.begin() + static_cast<std::ptrdiff_t>(c * options.adsPerCampaign),
                     ads.begin() + static_cast<std::ptrdiff_t>((c + 1) * options.adsPerCampaign));
    for (std::size_t z = 0; z < options.zipsPerCampaign; ++z) {
      cam.zips.push_back(zips[eligible[c * options.zipsPerCampaign + z]].zip);
    }
    cam.window = options.campaignsPerWindow ? static_cast<int>(c / options.campaignsPerWindow) : 0;
    plan.campaigns.push_back(std::move(cam));
  }
  return plan;
}

BalanceReport balance_check(const CampaignPlan& plan, const std::vector<ZipRow>& zips) {
  std::unordered_map<std::string, const ZipRow*> by_zip;
  for (const auto& z : zips) by_zip.emplace(z.zip, &z);
  std::vector<std::vector<double>> pop, inc;
  for (const auto& c : plan.campaigns) {
    auto& p = pop.emplace_back();
    auto& m = inc.emplace_back();
    for (const auto& z : c.zips) {
      auto it = by_zip.find(z);
      if (it == by_zip.end()) throw Error(ErrorCode::MissingInputs, "unknown ZIP " + z);
      p.push_back(it->second->population);
      m.push_back(it->second->income);
    }
  }
  return {stats::anova_oneway(pop), stats::anova_oneway(inc)};
}

std::vector<ZipRow> synthetic_zip_table(std::size_t n, Rng& rng) {
  std::vector<ZipRow> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ZipRow z;
    char id[24];
    std::snprintf(id, sizeof id, "%05zu", i);
    z.zip = id;
    z.population = std::round(std::exp(std::log(30'000.0) + 0.8 * rng.normal()));
    z.income = std::round(45'000.0 + 4'000.0 * std::log(z.population / 30'000.0) + 12'000.0 * rng.normal());
    out.push_back(std::move(z));
  }
  return out;
}

std::vector<ZipRow> load_zip_csv(const std::string& path) {
  const auto t = stats::DataTable::load_csv(path);
  std::vector<ZipRow> out(t.rows());
  const auto& pop = t.col("population");
  const auto& inc = t.col("income");
  for (std::size_t i = 0; i < t.rows(); ++i) {
    if (t.has_text("zip")) {
      out[i].zip = t.text("zip")[i];
    } else {
      // numeric parse drops leading zeros; restore the five-digit form
      char buf[24];
      std::snprintf(buf, sizeof buf, "%05lld", static_cast<long long>(t.col("zip")[i]));
      out[i].zip = buf;
    }
    out[i].population = pop[i];
    out[i].income = inc[i];
  }
  return out;
}

}  // namespace pairit::fieldkit
