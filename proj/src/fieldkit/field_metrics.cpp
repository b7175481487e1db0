#include "pairit/fieldkit/field_metrics.hpp"

#include <cmath>
#include <map>

#include "pairit/core/error.hpp"

namespace pairit::fieldkit {

std::vector<std::optional<double>> vtd_scores(const std::vector<ViewEvent>& views) {
  std::vector<std::optional<double>> out(views.size());
  double sum = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (views[i].durationSec > 0) {
      out[i] = std::log(views[i].durationSec);
      sum += *out[i];
      ++n;
    }
  }
  if (n == 0) return out;
  const double mean = sum / static_cast<double>(n);
  double ss = 0;
  for (const auto& v : out) {
    if (v) ss += (*v - mean) * (*v - mean);
  }
  const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  for (auto& v : out) {
    if (v) v = sd > 0 ? (*v - mean) / sd : 0.0;
  }
  return out;
}

std::vector<AdFieldMetrics> field_metrics(const std::vector<DeliveryRecord>& deliveries,
                                          const std::vector<ViewEvent>& views) {
  const auto z = vtd_scores(views);
  struct Acc {
    double frac = 0, vtd = 0;
    std::size_t n = 0, nz = 0;
  };
  std::map<std::string, Acc> acc;
  for (std::size_t i = 0; i < views.size(); ++i) {
    auto& a = acc[views[i].adId];
    a.frac += views[i].fractionViewed;
    ++a.n;
    if (z[i]) {
      a.vtd += *z[i];
      ++a.nz;
    }
  }

  std::vector<AdFieldMetrics> out;
  for (const auto& d : deliveries) {
    if (d.impressions <= 0) throw Error(ErrorCode::ZeroImpressions, d.adId);
    if (d.clicks < 0 || d.clicks > d.impressions) throw Error(ErrorCode::InvalidSample, d.adId + ": clicks out of range");
    if (d.spend < 0) throw Error(ErrorCode::InvalidSample, d.adId + ": negative spend");
    AdFieldMetrics m;
    m.adId = d.adId;
    m.campaignId = d.campaignId;
    m.impressions = d.impressions;
    m.clicks = d.clicks;
    m.spend = d.spend;
    m.ctrPct = 100.0 * static_cast<double>(d.clicks) / static_cast<double>(d.impressions);
    if (d.clicks > 0) m.cpc = d.spend / static_cast<double>(d.clicks);
    if (auto it = acc.find(d.adId); it != acc.end()) {
      m.views = it->second.n;
      m.vtr = it->second.frac / static_cast<double>(it->second.n);
      if (it->second.nz > 0) m.vtdLogSec = it->second.vtd / static_cast<double>(it->second.nz);
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace pairit::fieldkit
