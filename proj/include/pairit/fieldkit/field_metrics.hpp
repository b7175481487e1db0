#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pairit::fieldkit {

struct DeliveryRecord {
  std::string adId;
  std::string campaignId;
  long impressions = 0;
  long clicks = 0;
  double spend = 0;  // dollars
};

struct ViewEvent {
  std::string adId;
  double fractionViewed = 0;  // 0..1
  double durationSec = 0;
};

struct AdFieldMetrics {
  std::string adId;
  std::string campaignId;
  long impressions = 0;
  long clicks = 0;
  double spend = 0;
  double ctrPct = 0;
  std::optional<double> cpc;        // only when clicks > 0
  std::optional<double> vtr;        // mean fraction viewed over the ad's views
  std::optional<double> vtdLogSec;  // mean standardized log duration over the ad's views
  std::size_t views = 0;
};

// Standardized log(duration) for each view: log seconds, then z-scored with
// the sample standard deviation across all views passed in. Views with a
// non-positive duration get nullopt and do not enter the mean or SD.
std::vector<std::optional<double>> vtd_scores(const std::vector<ViewEvent>& views);

// Per-ad CTR (percent), CPC, VTR and VTD. Throws ZeroImpressions for an ad
// with no impressions and InvalidSample for clicks > impressions or negative
// spend.
std::vector<AdFieldMetrics> field_metrics(const std::vector<DeliveryRecord>& deliveries,
                                          const std::vector<ViewEvent>& views);

}  // namespace pairit::fieldkit
