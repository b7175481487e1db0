#include "pairit/service/analyze.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include "pairit/core/error.hpp"
#include "pairit/fieldkit/field_metrics.hpp"
#include "pairit/fieldkit/io.hpp"

namespace pairit::service {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double opt(const std::optional<double>& v) { return v ? *v : kNaN; }

std::string cell(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Writes the listed columns of a table; text columns verbatim.
void write_table_csv(std::ostream& out, const stats::DataTable& t, const std::vector<std::string>& cols) {
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out << ',';
      out << (t.has_text(cols[c]) ? t.text(cols[c])[r] : cell(t.col(cols[c])[r]));
    }
    out << '\n';
  }
}

double survey_number(const SessionState& st, const std::string& user, const std::string& item) {
  const auto u = st.survey.find(user);
  if (u == st.survey.end()) return kNaN;
  const auto a = u->second.find(item);
  if (a == u->second.end() || !a->second.is_number()) return kNaN;
  return a->second.get<double>();
}

const std::vector<std::string> kUserColumns = {
    "hai",       "productivity", "count",      "task_oriented", "interpersonal", "copy_edits",
    "image_edits", "ai_images",  "delegation", "diversity",     "recognition"};

struct ModelBlock {
  std::string outcome;
  std::string title;
};

const std::vector<ModelBlock> kArmOutcomes = {{"productivity", "Submissions"}, {"count", "Messages"},
                                              {"copy_edits", "Copy edits"},    {"image_edits", "Image edits"},
                                              {"delegation", "Delegation"},    {"diversity", "Diversity"}};

template <typename Fit>
void table_block(std::ostream& out, const std::string& heading, const std::vector<ModelBlock>& outcomes,
                 const std::vector<std::string>& rows, Fit&& fit) {
  out << heading << "\n\n";
  for (const auto& b : outcomes) {
    std::vector<stats::TableColumn> cols;
    std::vector<std::string> notes;
    for (bool demo : {false, true}) {
      const std::string title = b.title + (demo ? " (2)" : " (1)");
      try {
        cols.push_back({title, fit(b.outcome, demo)});
      } catch (const Error& e) {
        notes.push_back(title + ": not estimable (" + e.what() + ")");
      }
    }
    if (!cols.empty()) stats::render_table(out, cols, rows);
    for (const auto& n : notes) out << n << '\n';
    out << '\n';
  }
}

}  // namespace

Stage stage_from_string(std::string_view s) {
  if (s == "metrics") return Stage::Metrics;
  if (s == "models") return Stage::Models;
  if (s == "field") return Stage::Field;
  throw Error(ErrorCode::BadRequest, "unknown stage '" + std::string(s) + "' (metrics|models|field)");
}

std::vector<analytics::SessionRecord> load_run(const fs::path& runDir) {
  const auto dir = runDir / "sessions";
  std::vector<fs::path> files;
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
  }
  if (files.empty()) throw Error(ErrorCode::MissingInputs, "no session logs under " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<analytics::SessionRecord> out;
  for (const auto& f : files) out.push_back(analytics::load_record(f.string()));
  return out;
}

MetricsBundle compute_metrics(std::vector<analytics::SessionRecord> sessions, const AnalyzeOptions& options) {
  MetricsBundle b;
  b.sessions = std::move(sessions);
  analytics::KeywordLabelClient keywords;
  MockEmbeddingClient mock_embed;
  ChatCompletionClient& labeler = options.labeler ? *options.labeler : keywords;
  EmbeddingClient& embedder = options.embedder ? *options.embedder : mock_embed;
  for (const auto& s : b.sessions) analytics::label_session(s.sessionId, s.log, labeler, b.labels);
  try {
    b.distances = analytics::submission_distances(b.sessions, embedder);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyCorpus) throw;
    spdlog::warn("no submissions with text; diversity left empty");
  }
  b.users = analytics::user_metrics(b.sessions, b.labels, b.distances);
  return b;
}

stats::DataTable user_table(const MetricsBundle& b) {
  std::map<std::string, SessionState> states;
  for (const auto& s : b.sessions) states.emplace(s.sessionId, replay(s.log));

  std::map<std::string, std::vector<double>> num;
  std::vector<std::string> users, sessions;
  for (const auto& u : b.users) {
    users.push_back(u.userId);
    sessions.push_back(u.sessionId);
    num["hai"].push_back(u.arm == Arm::HumanAI ? 1 : 0);
    num["productivity"].push_back(static_cast<double>(u.submissions));
    num["count"].push_back(static_cast<double>(u.messageCount));
    num["task_oriented"].push_back(opt(u.taskOrientedFrac));
    num["interpersonal"].push_back(opt(u.interpersonalFrac));
    num["copy_edits"].push_back(static_cast<double>(u.copyEdits));
    num["image_edits"].push_back(static_cast<double>(u.imageEdits));
    num["ai_images"].push_back(static_cast<double>(u.aiImagesGenerated));
    num["delegation"].push_back(opt(u.delegation));
    num["diversity"].push_back(opt(u.diversity));
    num["recognition"].push_back(u.recognition ? *u.recognition : kNaN);
    const auto& st = states.at(u.sessionId);
    for (const auto& c : stats::kDemographicControls) num[c].push_back(survey_number(st, u.userId, c));
  }
  stats::DataTable t;
  t.add_text("user_id", users);
  t.add_text("session", sessions);
  for (auto& [name, values] : num) t.add(name, std::move(values));
  return t;
}

std::vector<fs::path> analyze(const fs::path& runDir, Stage stage, const AnalyzeOptions& options) {
  const auto out_dir = runDir / "analysis";
  std::vector<fs::path> written;
  auto open = [&](const std::string& name) {
    fs::create_directories(out_dir);
    written.push_back(out_dir / name);
    return std::ofstream(written.back(), std::ios::binary);
  };

  if (stage == Stage::Field) {
    const auto dir = runDir / "field";
    for (const char* f : {"ads.csv", "delivery.csv", "views.csv"}) {
      if (!fs::exists(dir / f)) throw Error(ErrorCode::MissingInputs, (dir / f).string() + " not found");
    }
    const auto ads = fieldkit::load_ads_csv((dir / "ads.csv").string());
    const auto rows = fieldkit::field_metrics(fieldkit::load_delivery_csv((dir / "delivery.csv").string()),
                                              fieldkit::load_views_csv((dir / "views.csv").string()));
    {
      auto out = open("field_metrics.csv");
      fieldkit::write_field_metrics_csv(out, rows);
    }
    std::map<std::string, const fieldkit::AdRecord*> ad_of;
    for (const auto& a : ads) ad_of[a.adId] = &a;
    std::vector<std::string> campaign;
    std::map<std::string, std::vector<double>> num;
    for (const auto& r : rows) {
      const auto it = ad_of.find(r.adId);
      if (it == ad_of.end()) throw Error(ErrorCode::MissingInputs, "ad " + r.adId + " has no ratings row");
      campaign.push_back(r.campaignId);
      num["hai"].push_back(it->second->arm == Arm::HumanAI ? 1 : 0);
      num["text"].push_back(it->second->text);
      num["image"].push_back(it->second->image);
      num["click"].push_back(it->second->click);
      num["spend"].push_back(r.spend);
      num["ctr"].push_back(r.ctrPct);
      num["cpc"].push_back(opt(r.cpc));  // zero-click ads drop out of the CPC model
      num["vtr"].push_back(opt(r.vtr));
      num["vtd"].push_back(opt(r.vtdLogSec));
    }
    stats::DataTable t;
    t.add_text("campaign", campaign);
    for (auto& [name, values] : num) t.add(name, std::move(values));
    auto out = open("field_models.txt");
    out << "Field outcomes, random intercept per campaign\n\n";
    std::vector<stats::TableColumn> cols;
    for (const auto& [name, title] : std::vector<std::pair<std::string, std::string>>{
             {"ctr", "CTR (%)"}, {"cpc", "CPC ($)"}, {"vtr", "VTR"}, {"vtd", "VTD (z log s)"}}) {
      try {
        cols.push_back({title, stats::fit_field(t, name)});
      } catch (const Error& e) {
        out << title << ": not estimable (" << e.what() << ")\n";
      }
    }
    if (!cols.empty()) stats::render_table(out, cols, {"hai", "text", "image", "click", "spend", "(Intercept)"});
    return written;
  }

  const auto bundle = compute_metrics(load_run(runDir), options);
  if (stage == Stage::Metrics) {
    {
      auto out = open("user_metrics.csv");
      analytics::write_user_metrics_csv(out, bundle.users);
    }
    {
      auto out = open("distances.csv");
      analytics::write_distances_csv(out, bundle.distances);
    }
    auto out = open("labels.csv");
    out << "session_id,seq,label\n";
    for (const auto& [key, label] : bundle.labels) out << key.sessionId << ',' << key.seq << ',' << to_string(label) << '\n';
    return written;
  }

  const auto t = user_table(bundle);
  {
    auto out = open("user_table.csv");
    std::vector<std::string> cols = {"user_id", "session"};
    cols.insert(cols.end(), kUserColumns.begin(), kUserColumns.end());
    cols.insert(cols.end(), stats::kDemographicControls.begin(), stats::kDemographicControls.end());
    write_table_csv(out, t, cols);
  }
  {
    auto out = open("arm_effects.txt");
    table_block(out, "Outcome on HAI; (2) adds demographic controls; HC1 standard errors", kArmOutcomes,
                {"hai", "(Intercept)"},
                [&](const std::string& y, bool demo) { return stats::fit_arm_effect(t, y, demo); });
  }
  auto out = open("recognition_interaction.txt");
  table_block(out, "Outcome on HAI, recognition and their interaction; (2) adds demographic controls",
              {{"productivity", "Submissions"}, {"count", "Messages"}},
              {"hai", "recognition", "hai:recognition", "(Intercept)"},
              [&](const std::string& y, bool demo) { return stats::fit_recognition_interaction(t, y, demo); });
  return written;
}

}  // namespace pairit::service
