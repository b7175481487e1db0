#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "pairit/core/error.hpp"
#include "pairit/fieldkit/campaigns.hpp"
#include "pairit/fieldkit/field_metrics.hpp"
#include "pairit/fieldkit/io.hpp"
#include "pairit/fieldkit/mockup.hpp"
#include "pairit/fieldkit/rating.hpp"
#include "pairit/fieldkit/sampling.hpp"
#include "support/field_data.hpp"

using namespace pairit;
using namespace pairit::fieldkit;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ClientError;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string golden(const std::string& name) { return read_file(std::string(PAIRIT_GOLDEN_DIR) + "/" + name); }

// Checks a sample against the design rules without looking at how it was
// drawn: per-team counts, flagged exclusion, and per-arm stratum balance.
struct SampleAudit {
  int teamsBelowOne = 0;
  int teamsAboveTwo = 0;
  int flaggedIncluded = 0;
  int duplicates = 0;
  int maxCellSpread = 0;  // max over arms of (largest - smallest stratum count)
};

SampleAudit audit(const std::vector<AdRecord>& ads, const StratifiedSample& s) {
  std::map<std::string, const AdRecord*> by_id;
  std::map<std::string, int> per_team;
  for (const auto& a : ads) {
    by_id[a.adId] = &a;
    if (!a.flagged) per_team.try_emplace(a.teamId, 0);
  }
  // Strata recomputed here by ranking within each arm.
  std::map<std::string, int> stratum;
  for (Arm arm : {Arm::HumanHuman, Arm::HumanAI}) {
    std::vector<const AdRecord*> v;
    for (const auto& a : ads) {
      if (a.arm == arm && !a.flagged) v.push_back(&a);
    }
    std::sort(v.begin(), v.end(), [](auto* x, auto* y) {
      return x->click != y->click ? x->click < y->click : x->adId < y->adId;
    });
    for (std::size_t r = 0; r < v.size(); ++r) stratum[v[r]->adId] = static_cast<int>(10 * r / v.size());
  }
  SampleAudit out;
  std::set<std::string> seen;
  int cells[2][10] = {};
  for (const auto& id : s.adIds) {
    if (!seen.insert(id).second) ++out.duplicates;
    const auto* a = by_id.at(id);
    if (a->flagged) {
      ++out.flaggedIncluded;
      continue;
    }
    ++per_team[a->teamId];
    ++cells[a->arm == Arm::HumanAI][stratum.at(id)];
  }
  for (const auto& [_, n] : per_team) {
    out.teamsBelowOne += n < 1;
    out.teamsAboveTwo += n > 2;
  }
  for (auto& arm : cells) {
    const auto [lo, hi] = std::minmax_element(std::begin(arm), std::end(arm));
    out.maxCellSpread = std::max(out.maxCellSpread, *hi - *lo);
  }
  return out;
}

}  // namespace

TEST_CASE("stratified sample of 2000 from 1751 teams") {
  Rng rng(11);
  auto ads = pairit::testing::synthetic_ads(1751, rng, 8);
  const auto s = stratified_sample(ads, 2000, rng);
  CHECK(s.adIds.size() == 2000);
  CHECK(s.removedFlagged == 8);
  const auto a = audit(ads, s);
  CHECK(a.teamsBelowOne == 0);
  CHECK(a.teamsAboveTwo == 0);
  CHECK(a.flaggedIncluded == 0);
  CHECK(a.duplicates == 0);
  CHECK(a.maxCellSpread <= 1);
  CHECK(s.armTotals[0] + s.armTotals[1] == 2000);
  CHECK(std::abs(s.armTotals[0] - s.armTotals[1]) <= 1);
}

TEST_CASE("one ad per team when the target equals the team count") {
  Rng rng(3);
  auto ads = pairit::testing::synthetic_ads(300, rng, 0, 1, 1);
  const auto s = stratified_sample(ads, 300, rng);
  std::set<std::string> teams;
  std::map<std::string, std::string> team_of;
  for (const auto& a : ads) team_of[a.adId] = a.teamId;
  for (const auto& id : s.adIds) teams.insert(team_of[id]);
  CHECK(s.adIds.size() == 300);
  CHECK(teams.size() == 300);
}

TEST_CASE("flagged ads never enter the strata") {
  std::vector<AdRecord> ads;
  for (int i = 0; i < 20; ++i) {
    ads.push_back({"a" + std::to_string(i), "t" + std::to_string(i / 2), Arm::HumanHuman, 4, 4, 1.0 + i * 0.3,
                   i == 19});
  }
  const auto strata = click_strata(ads);
  CHECK(strata[19] == -1);
  std::map<int, int> per;
  for (int i = 0; i < 19; ++i) ++per[strata[i]];
  CHECK(per.size() == 10);
  // 19 ranked ads: stratum of rank r is floor(10 r / 19)
  for (int i = 0; i < 19; ++i) CHECK(strata[i] == 10 * i / 19);
}

TEST_CASE("infeasible targets name the binding constraint") {
  Rng rng(5);
  auto ads = pairit::testing::synthetic_ads(50, rng, 0, 1, 3);
  CHECK(code_of([&] { stratified_sample(ads, 49, rng); }) == ErrorCode::InfeasibleConstraints);
  try {
    stratified_sample(ads, 1000, rng);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("two ads per team") != std::string::npos);
  }
}

TEST_CASE("ZIP eligibility is inclusive") {
  CHECK_FALSE(zip_eligible({"a", 9'999, 0}));
  CHECK(zip_eligible({"b", 10'000, 0}));
  CHECK(zip_eligible({"c", 100'000, 0}));
  CHECK_FALSE(zip_eligible({"d", 100'001, 0}));
}

TEST_CASE("campaign allocation") {
  Rng rng(21);
  const auto zips = synthetic_zip_table(70'000, rng);
  std::vector<std::string> sample;
  for (int i = 0; i < 2000; ++i) sample.push_back("ad-" + std::to_string(i));

  const auto plan = allocate_campaigns(sample, zips, 99);
  REQUIRE(plan.campaigns.size() == 400);
  CHECK(plan.seed == 99);
  std::set<std::string> ads, zs;
  std::map<std::string, const ZipRow*> zip_of;
  for (const auto& z : zips) zip_of[z.zip] = &z;
  std::size_t ad_total = 0, zip_total = 0, ineligible = 0;
  std::map<int, int> per_window;
  for (const auto& c : plan.campaigns) {
    CHECK(c.adIds.size() == 5);
    CHECK(c.zips.size() == 133);
    ad_total += c.adIds.size();
    zip_total += c.zips.size();
    ads.insert(c.adIds.begin(), c.adIds.end());
    zs.insert(c.zips.begin(), c.zips.end());
    for (const auto& z : c.zips) ineligible += !zip_eligible(*zip_of.at(z));
    ++per_window[c.window];
  }
  CHECK(ads.size() == ad_total);
  CHECK(ads.size() == 2000);
  CHECK(zs.size() == zip_total);
  CHECK(ineligible == 0);
  CHECK(per_window.size() == 8);

  const auto again = allocate_campaigns(sample, zips, 99);
  CHECK(again.campaigns.front().zips == plan.campaigns.front().zips);
  CHECK(again.campaigns.back().adIds == plan.campaigns.back().adIds);

  std::vector<std::string> odd = sample;
  odd.push_back("extra");
  CHECK(code_of([&] { allocate_campaigns(odd, zips, 1); }) == ErrorCode::InvalidSample);
  const std::vector<ZipRow> few(zips.begin(), zips.begin() + 1000);
  CHECK(code_of([&] { allocate_campaigns(sample, few, 1); }) == ErrorCode::InsufficientZips);
}

TEST_CASE("random ZIP allocation passes the balance check on most seeds") {
  Rng rng(8);
  const auto zips = synthetic_zip_table(70'000, rng);
  std::vector<std::string> sample;
  for (int i = 0; i < 2000; ++i) sample.push_back("ad-" + std::to_string(i));
  int balanced = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto report = balance_check(allocate_campaigns(sample, zips, seed), zips);
    CHECK(report.population.dfBetween == 399);
    CHECK(report.population.dfWithin == 400 * 133 - 400);
    balanced += report.population.p > 0.05;
  }
  CHECK(balanced >= 45);
}

TEST_CASE("CTR and CPC arithmetic") {
  const auto m = field_metrics({{"a", "c", 1000, 10, 5.0}, {"b", "c", 400, 0, 3.0}}, {});
  CHECK(m[0].ctrPct == doctest::Approx(1.0));
  REQUIRE(m[0].cpc.has_value());
  CHECK(*m[0].cpc == doctest::Approx(0.5));
  CHECK_FALSE(m[1].cpc.has_value());
  CHECK(m[1].ctrPct == 0.0);
  CHECK_FALSE(m[0].vtr.has_value());

  CHECK(code_of([] { field_metrics({{"z", "c", 0, 0, 0}}, {}); }) == ErrorCode::ZeroImpressions);
  CHECK(code_of([] { field_metrics({{"z", "c", 5, 6, 0}}, {}); }) == ErrorCode::InvalidSample);
  CHECK(code_of([] { field_metrics({{"z", "c", 5, 1, -1}}, {}); }) == ErrorCode::InvalidSample);
}

TEST_CASE("CPC times clicks recovers spend") {
  Rng rng(4);
  std::vector<DeliveryRecord> d;
  for (int i = 0; i < 2000; ++i) {
    const long clicks = 1 + static_cast<long>(rng.index(40));
    const double spend = std::round(rng.uniform(0, 300) * 100) / 100;  // whole cents
    d.push_back({"ad" + std::to_string(i), "c", 5000, clicks, spend});
  }
  double worst = 0;
  for (const auto& m : field_metrics(d, {})) worst = std::max(worst, std::abs(*m.cpc * m.clicks - m.spend));
  // division then multiplication can be off by one rounding step
  CHECK(worst <= 1e-12);
}

TEST_CASE("VTD is a z-scored log duration") {
  const double e = std::exp(1.0);
  const auto z = vtd_scores({{"a", 0.5, e}, {"a", 1.0, e * e}});
  REQUIRE(z[0].has_value());
  // logs {1, 2}: mean 1.5, sample sd 1/sqrt(2)
  CHECK(*z[0] == doctest::Approx(-0.70710678).epsilon(1e-8));
  CHECK(*z[1] == doctest::Approx(0.70710678).epsilon(1e-8));

  const auto m = field_metrics({{"a", "c", 100, 1, 1}, {"b", "c", 100, 1, 1}},
                               {{"a", 0.2, e}, {"a", 0.6, e}, {"b", 1.0, e * e * e}, {"b", 0.0, 0.0}});
  CHECK(*m[0].vtr == doctest::Approx(0.4));
  CHECK(*m[1].vtr == doctest::Approx(0.5));
  // logs {1, 1, 3}: mean 5/3, sd sqrt(4/3)
  CHECK(*m[0].vtdLogSec == doctest::Approx((1 - 5.0 / 3) / std::sqrt(4.0 / 3)));
  CHECK(*m[1].vtdLogSec == doctest::Approx((3 - 5.0 / 3) / std::sqrt(4.0 / 3)));
  CHECK(m[1].views == 2);
}

TEST_CASE("rating sampler covers every ad at least three times") {
  Rng rng(1300);
  std::vector<std::string> ids;
  for (int i = 0; i < 11'024; ++i) ids.push_back("ad" + std::to_string(i));
  RatingSampler sampler(ids, rng);
  const auto& s = sampler.samples();
  REQUIRE(s.size() == 1300);
  // independent count
  std::map<std::string, int> count;
  bool all_forty = true, repeat = false;
  for (const auto& list : s) {
    all_forty = all_forty && list.size() == 40;
    std::set<std::string> u(list.begin(), list.end());
    repeat = repeat || u.size() != list.size();
    for (const auto& id : list) ++count[id];
  }
  int lo = 1 << 30;
  for (const auto& id : ids) lo = std::min(lo, count[id]);
  CHECK(all_forty);
  CHECK_FALSE(repeat);
  CHECK(lo >= 3);
  CHECK(count.size() == ids.size());
  const auto rep = coverage(ids, s);
  CHECK(rep.minCount == static_cast<std::size_t>(lo));
  CHECK_FALSE(rep.repeatsWithinList);
}

TEST_CASE("rating sampler small cases and exhaustion") {
  Rng rng(2);
  std::vector<std::string> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(std::to_string(i));
  CHECK(code_of([&] { RatingSampler(ten, rng, {1, 40, 3}); }) == ErrorCode::CoverageInfeasible);
  CHECK(code_of([&] { RatingSampler(ten, rng, {2, 10, 3}); }) == ErrorCode::CoverageInfeasible);

  RatingSampler small(ten, rng, {3, 10, 3});
  const auto rep = coverage(ten, small.samples());
  CHECK(rep.minCount == 3);
  CHECK(rep.maxCount == 3);
  CHECK_FALSE(rep.repeatsWithinList);

  std::set<const std::vector<std::string>*> handed;
  for (int i = 0; i < 3; ++i) handed.insert(&small.next_for_rater());
  CHECK(handed.size() == 3);
  CHECK(small.remaining() == 0);
  CHECK(code_of([&] { small.next_for_rater(); }) == ErrorCode::SamplesExhausted);
}

TEST_CASE("rating prompts match the reference listing") {
  const std::string task = "Create an ad for the report.";
  const auto req = rating_request("https://example.org/m.png", task);
  std::string expected = golden("rating_system.txt");
  expected.replace(expected.find("{task}"), 6, task);
  CHECK(req.system == expected);
  CHECK(req.user == golden("rating_user.txt"));
  CHECK(req.temperature == 0.0);
  CHECK(req.model == "gpt-4o-mini-2024-07-18");
  CHECK(req.imageUrl == "https://example.org/m.png");
  CHECK(req.schema["required"].size() == 3);
}

TEST_CASE("ai_rating decode, retry and failure") {
  ScriptedChatClient fixed({R"({"text":5,"image":6,"click":4})"});
  CHECK(ai_rating("m", "task", fixed) == AiRating{5, 6, 4});
  CHECK(ai_rating("m", "task", fixed) == ai_rating("m", "task", fixed));
  CHECK(fixed.requests().back().temperature == 0.0);

  ScriptedChatClient bad({R"({"text":9,"image":6,"click":4})"});
  CHECK(code_of([&] { ai_rating("m", "task", bad); }) == ErrorCode::DecodeFailure);
  CHECK(bad.calls() == 2);

  ScriptedChatClient recovers({R"({"text":0,"image":1,"click":1})", R"({"text":7,"image":1,"click":2})"});
  CHECK(ai_rating("m", "task", recovers) == AiRating{7, 1, 2});
  CHECK(recovers.calls() == 2);

  CHECK_FALSE(decode_rating("not json").has_value());
  CHECK_FALSE(decode_rating(R"({"text":5.5,"image":6,"click":4})").has_value());
  CHECK_FALSE(decode_rating(R"({"text":5,"image":6})").has_value());
}

TEST_CASE("ai_rating_batch bounds concurrency and keeps order") {
  std::atomic<int> in_flight{0}, peak{0};
  FunctionChatClient client([&](const ChatRequest& r) {
    const int now = ++in_flight;
    int p = peak.load();
    while (now > p && !peak.compare_exchange_weak(p, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
    --in_flight;
    const int v = 1 + static_cast<int>(r.imageUrl->size() % 7);
    return nlohmann::json{{"text", v}, {"image", v}, {"click", v}}.dump();
  });
  std::vector<std::string> urls;
  for (int i = 0; i < 40; ++i) urls.push_back(std::string(static_cast<std::size_t>(i + 1), 'x'));
  const auto out = ai_rating_batch(urls, "task", client, 3);
  REQUIRE(out.size() == 40);
  CHECK(peak.load() <= 3);
  for (int i = 0; i < 40; ++i) {
    REQUIRE(out[i].rating.has_value());
    CHECK(out[i].rating->text == 1 + (i + 1) % 7);
  }
}

TEST_CASE("mockup export") {
  AdDraft ad;
  ad.headline = "Where the money goes";
  ad.primaryText = "Read the new budget report.";
  ad.description = "Five minutes, no jargon.";
  ad.image = StockImage{2};
  const auto spec = mockup_export(ad);
  std::vector<std::string> names;
  for (const auto& e : spec["elements"]) names.push_back(e["name"]);
  CHECK(names == mockup_element_names());
  CHECK(names.size() == 10);
  CHECK(spec["complete"] == true);

  const std::string path = std::string(PAIRIT_GOLDEN_DIR) + "/mockup_fixed.json";
  if (std::getenv("PAIRIT_UPDATE_GOLDEN")) std::ofstream(path, std::ios::binary) << spec.dump(2) << '\n';
  CHECK(spec.dump(2) + "\n" == golden("mockup_fixed.json"));

  ad.description.clear();
  const auto partial = mockup_export(ad);
  CHECK(partial["complete"] == false);
  CHECK(partial["missing"] == nlohmann::json::array({"description"}));
  CHECK(partial["elements"][3]["description"] == "");

  ad.image.reset();
  CHECK(code_of([&] { mockup_export(ad); }) == ErrorCode::MissingImage);
}

TEST_CASE("CSV round trips") {
  const auto dir = std::filesystem::temp_directory_path() / "pairit_fieldkit_csv";
  std::filesystem::create_directories(dir);
  {
    std::ofstream z(dir / "zips.csv");
    z << "zip,population,income\n02134,15000,52000\n90210,21000,120000\n";
    std::ofstream d(dir / "delivery.csv");
    d << "adId,campaignId,impressions,clicks,spend\n17,campaign-001,1000,10,5\n";
    std::ofstream v(dir / "views.csv");
    v << "adId,fractionViewed,durationSec\n17,0.5,3\n17,1.5,3\n";
  }
  const auto zips = load_zip_csv((dir / "zips.csv").string());
  CHECK(zips[0].zip == "02134");
  const auto d = load_delivery_csv((dir / "delivery.csv").string());
  CHECK(d[0].adId == "17");
  CHECK(d[0].clicks == 10);
  CHECK(code_of([&] { load_views_csv((dir / "views.csv").string()); }) == ErrorCode::InvalidSample);

  std::ostringstream out;
  write_field_metrics_csv(out, field_metrics(d, {}));
  CHECK(out.str() == "adId,campaignId,impressions,clicks,spend,ctrPct,cpc,vtr,vtdLogSec,views\n"
                     "17,campaign-001,1000,10,5,1,0.5,,,0\n");
  std::filesystem::remove_all(dir);
}
