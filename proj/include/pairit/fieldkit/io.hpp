#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "pairit/fieldkit/campaigns.hpp"
#include "pairit/fieldkit/field_metrics.hpp"
#include "pairit/fieldkit/sampling.hpp"

namespace pairit::fieldkit {

// CSV inputs. Column names follow the struct fields; ratings and the flag
// column are optional for ads (defaults 4 and 0).
std::vector<AdRecord> load_ads_csv(const std::string& path);
std::vector<DeliveryRecord> load_delivery_csv(const std::string& path);
std::vector<ViewEvent> load_views_csv(const std::string& path);

// CSV outputs.
void write_sample_csv(std::ostream& out, const StratifiedSample& sample, const std::vector<AdRecord>& ads);
void write_plan_csv(std::ostream& out, const CampaignPlan& plan);
void write_field_metrics_csv(std::ostream& out, const std::vector<AdFieldMetrics>& rows);

}  // namespace pairit::fieldkit
