#include "pairit/analytics/metrics.hpp"

#include <filesystem>
#include <sstream>

#include "pairit/core/error.hpp"
#include "pairit/core/text.hpp"

namespace pairit::analytics {

namespace {

std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream ss;
  ss.precision(10);
  ss << *v;
  return ss.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool has_text(const AdDraft& ad) {
  return !trim(ad.headline).empty() || !trim(ad.primaryText).empty() || !trim(ad.description).empty();
}

}  // namespace

SessionRecord make_record(std::string sessionId, EventLog log) {
  SessionRecord r{std::move(sessionId), Arm::HumanHuman, std::move(log)};
  for (const auto& e : r.log.events()) {
    if (const auto* j = e.as<ev::Join>(); j && j->role == Role::Agent) r.arm = Arm::HumanAI;
  }
  return r;
}

SessionRecord load_record(const std::string& path) {
  return make_record(std::filesystem::path(path).stem().string(), EventLog::load(path));
}

std::map<std::string, std::size_t> character_contribution(const SessionRecord& s, Attribution mode) {
  std::map<std::string, std::size_t> out;
  std::string human, agent;
  for (const auto& e : s.log.events()) {
    if (const auto* j = e.as<ev::Join>()) {
      (j->role == Role::Agent ? agent : human) = e.actor;
      out.emplace(e.actor, 0);
    }
  }
  const bool jump = mode == Attribution::JumpRule && s.arm == Arm::HumanAI && !agent.empty();
  for (const auto& e : s.log.events()) {
    const auto* te = e.as<ev::TextEdit>();
    if (!te) continue;
    const auto n = char_count(te->inserted);
    if (jump) {
      out[n > kJumpThreshold ? agent : human] += n;
    } else {
      out[e.actor] += n;
    }
  }
  return out;
}

std::optional<double> delegation(const SessionRecord& s, const std::string& userId, Attribution mode) {
  const auto chars = character_contribution(s, mode);
  std::size_t total = 0;
  for (const auto& [_, n] : chars) total += n;
  if (total == 0) return std::nullopt;
  const auto it = chars.find(userId);
  const std::size_t mine = it == chars.end() ? 0 : it->second;
  return 1.0 - static_cast<double>(mine) / static_cast<double>(total);
}

std::string embedding_text(const AdDraft& ad) {
  return ad.headline + "\n" + ad.primaryText + "\n" + ad.description;
}

double cosine_distance(const Eigen::VectorXd& v, const Eigen::VectorXd& c) {
  const double nv = v.norm(), nc = c.norm();
  if (nv == 0.0 || nc == 0.0) throw Error(ErrorCode::InvalidSample, "zero-norm embedding");
  return 1.0 - v.dot(c) / (nv * nc);
}

std::vector<SubmissionDistance> submission_distances(const std::vector<SessionRecord>& sessions,
                                                     EmbeddingClient& client) {
  struct Item {
    SubmissionDistance d;
    Eigen::VectorXd v;
  };
  std::vector<Item> items;
  for (const auto& s : sessions) {
    const auto state = replay(s.log);
    for (const auto& sub : state.submissions) {
      if (!has_text(sub.ad)) continue;
      items.push_back({{s.sessionId, sub.index, s.arm, 0.0}, client.embed(embedding_text(sub.ad))});
    }
  }
  if (items.empty()) throw Error(ErrorCode::EmptyCorpus, "no submission with text");

  std::map<Arm, Eigen::VectorXd> centroid;
  std::map<Arm, std::size_t> count;
  for (const auto& it : items) {
    auto [pos, fresh] = centroid.try_emplace(it.d.arm, Eigen::VectorXd::Zero(it.v.size()));
    if (pos->second.size() != it.v.size()) throw Error(ErrorCode::InvalidSample, "embedding dimension changed");
    pos->second += it.v;
    ++count[it.d.arm];
  }
  for (auto& [arm, c] : centroid) c /= static_cast<double>(count[arm]);

  std::vector<SubmissionDistance> out;
  out.reserve(items.size());
  for (auto& it : items) {
    it.d.distance = cosine_distance(it.v, centroid[it.d.arm]);
    out.push_back(it.d);
  }
  return out;
}

std::optional<CompletionRates> completion_rates(const std::vector<AdDraft>& submissions) {
  if (submissions.empty()) return std::nullopt;
  CompletionRates r;
  for (const auto& ad : submissions) {
    r.headline += trim(ad.headline).empty() ? 0 : 1;
    r.primaryText += trim(ad.primaryText).empty() ? 0 : 1;
    r.description += trim(ad.description).empty() ? 0 : 1;
  }
  const double n = static_cast<double>(submissions.size());
  r.headline /= n;
  r.primaryText /= n;
  r.description /= n;
  return r;
}

int recognition_code(int score, Arm arm) {
  if (score < 1 || score > 7) throw Error(ErrorCode::InvalidSample, "partner perception score out of range");
  const bool believed_ai = score >= 4;
  return (arm == Arm::HumanAI) == believed_ai ? 1 : 0;
}

std::vector<UserMetrics> user_metrics(const std::vector<SessionRecord>& sessions, const LabelTable& labels,
                                      const std::vector<SubmissionDistance>& distances) {
  std::map<std::pair<std::string, std::size_t>, double> dist;
  for (const auto& d : distances) dist[{d.sessionId, d.index}] = d.distance;

  std::vector<UserMetrics> rows;
  for (const auto& s : sessions) {
    const auto state = replay(s.log);
    if (state.status != SessionStatus::Completed) continue;

    std::vector<AdDraft> ads;
    std::vector<double> own_dist;
    for (const auto& sub : state.submissions) {
      ads.push_back(sub.ad);
      if (auto it = dist.find(std::make_pair(s.sessionId, sub.index)); it != dist.end()) own_dist.push_back(it->second);
    }

    for (const auto& user : state.humans()) {
      UserMetrics m;
      m.userId = user;
      m.sessionId = s.sessionId;
      m.arm = s.arm;
      std::vector<MessageLabel> mine;
      for (const auto& e : s.log.events()) {
        if (e.actor != user || !e.as<ev::ChatMessage>()) continue;
        auto it = labels.find({s.sessionId, e.seq});
        mine.push_back(it == labels.end() ? MessageLabel::Other : it->second);
      }
      m.messageCount = mine.size();
      if (auto f = communication_fractions(mine)) {
        m.taskOrientedFrac = f->first;
        m.interpersonalFrac = f->second;
      }
      if (auto c = state.counts.find(user); c != state.counts.end()) {
        m.copyEdits = c->second.copyEdits;
        m.imageEdits = c->second.imageEdits;
        m.aiImagesGenerated = c->second.imagesGenerated;
      }
      m.submissions = ads.size();
      m.delegation = delegation(s, user, Attribution::ActorLabels);
      m.delegationJumpRule = delegation(s, user, Attribution::JumpRule);
      if (!own_dist.empty()) {
        double sum = 0;
        for (double d : own_dist) sum += d;
        m.diversity = sum / static_cast<double>(own_dist.size());
      }
      m.completion = completion_rates(ads);
      if (auto sv = state.survey.find(user); sv != state.survey.end()) {
        if (auto a = sv->second.find(kPartnerPerceptionItem); a != sv->second.end() && a->second.is_number_integer()) {
          m.recognition = recognition_code(static_cast<int>(a->second), s.arm);
        }
      }
      rows.push_back(std::move(m));
    }
  }
  return rows;
}

void write_user_metrics_csv(std::ostream& out, const std::vector<UserMetrics>& rows) {
  out << "user_id,session_id,arm,hai,count,task_oriented,interpersonal,copy_edits,image_edits,ai_images,"
         "productivity,delegation,delegation_jump_rule,diversity,headline_rate,primary_text_rate,"
         "description_rate,recognition\n";
  for (const auto& r : rows) {
    out << csv_field(r.userId) << ',' << csv_field(r.sessionId) << ',' << to_string(r.arm) << ','
        << (r.arm == Arm::HumanAI ? 1 : 0) << ',' << r.messageCount << ',' << fmt_opt(r.taskOrientedFrac) << ','
        << fmt_opt(r.interpersonalFrac) << ',' << r.copyEdits << ',' << r.imageEdits << ','
        << r.aiImagesGenerated << ',' << r.submissions << ',' << fmt_opt(r.delegation) << ','
        << fmt_opt(r.delegationJumpRule) << ',' << fmt_opt(r.diversity) << ','
        << fmt_opt(r.completion ? std::optional(r.completion->headline) : std::nullopt) << ','
        << fmt_opt(r.completion ? std::optional(r.completion->primaryText) : std::nullopt) << ','
        << fmt_opt(r.completion ? std::optional(r.completion->description) : std::nullopt) << ','
        << (r.recognition ? std::to_string(*r.recognition) : "") << '\n';
  }
}

void write_distances_csv(std::ostream& out, const std::vector<SubmissionDistance>& rows) {
  out << "session_id,submission,arm,diversity\n";
  for (const auto& r : rows) {
    out << csv_field(r.sessionId) << ',' << r.index << ',' << to_string(r.arm) << ',' << fmt_opt(r.distance)
        << '\n';
  }
}

}  // namespace pairit::analytics
