#include "pairit/fieldkit/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include "pairit/fieldkit/campaigns.hpp"
#include "pairit/fieldkit/io.hpp"
#include "pairit/fieldkit/sampling.hpp"

namespace pairit::fieldkit {

namespace fs = std::filesystem;

void synthesize_field_data(const fs::path& dir, std::uint64_t seed, const SyntheticFieldOptions& o) {
  fs::create_directories(dir);
  Rng rng(seed);
  Rng ad_rng = rng.split(1), zip_rng = rng.split(2), pick_rng = rng.split(3), delivery_rng = rng.split(4);

  std::vector<AdRecord> ads;
  for (std::size_t t = 0; t < o.teams; ++t) {
    const Arm arm = t % 2 ? Arm::HumanAI : Arm::HumanHuman;
    const auto n = 1 + ad_rng.index(12);
    for (std::uint64_t k = 0; k < n; ++k) {
      AdRecord a;
      a.adId = "ad-" + std::to_string(ads.size() + 1);
      a.teamId = "team-" + std::to_string(t + 1);
      a.arm = arm;
      a.text = std::round(ad_rng.uniform(1, 7) * 100) / 100;
      a.image = std::round(ad_rng.uniform(1, 7) * 100) / 100;
      a.click = std::round(ad_rng.uniform(1, 7) * 100) / 100;
      ads.push_back(std::move(a));
    }
  }
  std::size_t marked = 0;
  for (std::size_t i = 1; i < ads.size() && marked < o.flagged; i += 37) {
    if (ads[i].teamId == ads[i - 1].teamId) {
      ads[i].flagged = true;
      ++marked;
    }
  }
  {
    std::ofstream out(dir / "ads.csv", std::ios::binary);
    out << "adId,teamId,arm,text,image,click,flagged\n";
    for (const auto& a : ads) {
      out << a.adId << ',' << a.teamId << ',' << to_string(a.arm) << ',' << a.text << ',' << a.image << ','
          << a.click << ',' << (a.flagged ? 1 : 0) << '\n';
    }
  }

  const auto zips = synthetic_zip_table(o.zipRows, zip_rng);
  {
    std::ofstream out(dir / "zips.csv", std::ios::binary);
    out << "zip,population,income\n";
    for (const auto& z : zips) out << z.zip << ',' << z.population << ',' << z.income << '\n';
  }

  const auto sample = stratified_sample(ads, o.sampleSize, pick_rng);
  {
    std::ofstream out(dir / "sample.csv", std::ios::binary);
    write_sample_csv(out, sample, ads);
  }
  const auto plan = allocate_campaigns(sample.adIds, zips, seed);
  {
    std::ofstream out(dir / "plan.csv", std::ios::binary);
    write_plan_csv(out, plan);
  }

  std::map<std::string, const AdRecord*> ad_of;
  for (const auto& a : ads) ad_of[a.adId] = &a;
  std::ofstream delivery(dir / "delivery.csv", std::ios::binary);
  std::ofstream views(dir / "views.csv", std::ios::binary);
  delivery << "adId,campaignId,impressions,clicks,spend\n";
  views << "adId,fractionViewed,durationSec\n";
  for (const auto& c : plan.campaigns) {
    for (const auto& id : c.adIds) {
      const auto& a = *ad_of.at(id);
      const long imp = std::max(1L, std::lround(o.meanImpressions * std::exp(0.5 * delivery_rng.normal() - 0.125)));
      const double ctr = std::max(0.0, o.baseCtrPct + (a.arm == Arm::HumanAI ? o.haiCtrEffect : 0.0) +
                                           o.clickRatingCtrSlope * (a.click - 4));
      const double mean = static_cast<double>(imp) * ctr / 100;
      const long clicks = std::clamp(std::lround(mean + std::sqrt(mean) * delivery_rng.normal()), 0L, imp);
      const double spend = std::round(static_cast<double>(imp) * delivery_rng.uniform(3, 6) / 10) / 100;  // CPM $3-6
      delivery << id << ',' << c.campaignId << ',' << imp << ',' << clicks << ',' << spend << '\n';
      for (long k = 0; k < clicks; ++k) {
        if (!delivery_rng.bernoulli(0.6)) continue;  // not every click opens the document
        const double frac = std::round(delivery_rng.uniform01() * 1000) / 1000;
        const double dur = std::round(std::exp(3.0 + delivery_rng.normal()) * 10) / 10;
        views << id << ',' << frac << ',' << dur << '\n';
      }
    }
  }
}

}  // namespace pairit::fieldkit
