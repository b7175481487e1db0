#include "pairit/fieldkit/io.hpp"

#include <cstdio>
#include <map>

#include "pairit/core/error.hpp"
#include "pairit/stats/models.hpp"

namespace pairit::fieldkit {

namespace {

// Id columns can come back numeric from the CSV reader; render them back.
std::vector<std::string> id_column(const stats::DataTable& t, const std::string& name) {
  if (t.has_text(name)) return t.text(name);
  std::vector<std::string> out;
  for (double v : t.col(name)) out.push_back(std::to_string(static_cast<long long>(v)));
  return out;
}

std::vector<double> num_or(const stats::DataTable& t, const std::string& name, double fallback) {
  if (!t.has(name)) return std::vector<double>(t.rows(), fallback);
  return t.col(name);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::vector<AdRecord> load_ads_csv(const std::string& path) {
  const auto t = stats::DataTable::load_csv(path);
  const auto ad = id_column(t, "adId");
  const auto team = id_column(t, "teamId");
  const auto& arm = t.text("arm");
  const auto text = num_or(t, "text", 4), image = num_or(t, "image", 4), click = num_or(t, "click", 4);
  const auto flagged = num_or(t, "flagged", 0);
  std::vector<AdRecord> out(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    out[i] = AdRecord{ad[i], team[i], arm_from_string(arm[i]), text[i], image[i], click[i], flagged[i] != 0};
  }
  return out;
}

std::vector<DeliveryRecord> load_delivery_csv(const std::string& path) {
  const auto t = stats::DataTable::load_csv(path);
  const auto ad = id_column(t, "adId");
  const auto campaign = id_column(t, "campaignId");
  const auto& imp = t.col("impressions");
  const auto& clicks = t.col("clicks");
  const auto& spend = t.col("spend");
  std::vector<DeliveryRecord> out(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    out[i] = DeliveryRecord{ad[i], campaign[i], static_cast<long>(imp[i]), static_cast<long>(clicks[i]), spend[i]};
  }
  return out;
}

std::vector<ViewEvent> load_views_csv(const std::string& path) {
  const auto t = stats::DataTable::load_csv(path);
  const auto ad = id_column(t, "adId");
  const auto& frac = t.col("fractionViewed");
  const auto& dur = t.col("durationSec");
  std::vector<ViewEvent> out(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    if (frac[i] < 0 || frac[i] > 1) throw Error(ErrorCode::InvalidSample, ad[i] + ": fractionViewed outside [0,1]");
    out[i] = ViewEvent{ad[i], frac[i], dur[i]};
  }
  return out;
}

void write_sample_csv(std::ostream& out, const StratifiedSample& sample, const std::vector<AdRecord>& ads) {
  const auto strata = click_strata(ads);
  std::map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < ads.size(); ++i) at[ads[i].adId] = i;
  out << "adId,teamId,arm,stratum,click\n";
  for (const auto& id : sample.adIds) {
    const auto i = at.at(id);
    out << id << ',' << ads[i].teamId << ',' << to_string(ads[i].arm) << ',' << strata[i] << ','
        << fmt(ads[i].click) << '\n';
  }
}

void write_plan_csv(std::ostream& out, const CampaignPlan& plan) {
  out << "campaignId,window,kind,value\n";
  for (const auto& c : plan.campaigns) {
    for (const auto& a : c.adIds) out << c.campaignId << ',' << c.window << ",ad," << a << '\n';
    for (const auto& z : c.zips) out << c.campaignId << ',' << c.window << ",zip," << z << '\n';
  }
}

void write_field_metrics_csv(std::ostream& out, const std::vector<AdFieldMetrics>& rows) {
  out << "adId,campaignId,impressions,clicks,spend,ctrPct,cpc,vtr,vtdLogSec,views\n";
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  for (const auto& r : rows) {
    out << r.adId << ',' << r.campaignId << ',' << r.impressions << ',' << r.clicks << ',' << fmt(r.spend) << ','
        << fmt(r.ctrPct) << ',' << opt(r.cpc) << ',' << opt(r.vtr) << ',' << opt(r.vtdLogSec) << ',' << r.views
        << '\n';
  }
}

}  // namespace pairit::fieldkit
