#pragma once

#include <Eigen/Core>
#include <array>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pairit/analytics/labels.hpp"
#include "pairit/clients/clients.hpp"
#include "pairit/core/event_log.hpp"
#include "pairit/core/replay.hpp"

namespace pairit::analytics {

// Edits inserting more than this many characters at once are treated as
// machine-written when attributing text from the stream alone.
inline constexpr std::size_t kJumpThreshold = 10;

// Survey item holding "I believe my partner was an AI during the task" (1..7).
inline constexpr const char* kPartnerPerceptionItem = "partner_is_ai";

struct SessionRecord {
  std::string sessionId;
  Arm arm = Arm::HumanHuman;
  EventLog log;
};

// Arm is inferred from the joined roles (any agent member => HumanAI).
SessionRecord make_record(std::string sessionId, EventLog log);
SessionRecord load_record(const std::string& path);

enum class Attribution {
  ActorLabels,  // trust the logged actor of each edit
  JumpRule,     // human-AI sessions: any edit inserting > 10 characters is the agent's
};

// Inserted characters per actor. Deletions do not count as contribution.
std::map<std::string, std::size_t> character_contribution(const SessionRecord& s,
                                                          Attribution mode = Attribution::ActorLabels);

// 1 - chars(user) / chars(all). nullopt (ZeroWork) when nobody inserted text.
std::optional<double> delegation(const SessionRecord& s, const std::string& userId,
                                 Attribution mode = Attribution::ActorLabels);

// Text that gets embedded for one ad.
std::string embedding_text(const AdDraft& ad);

struct SubmissionDistance {
  std::string sessionId;
  std::size_t index = 0;
  Arm arm = Arm::HumanHuman;
  double distance = 0.0;
};

// 1 - cosine(v, c). Throws InvalidSample if either vector has zero norm.
double cosine_distance(const Eigen::VectorXd& v, const Eigen::VectorXd& c);

// Distance of every text-bearing submission to its arm's centroid (mean of
// the raw embedding vectors). Throws EmptyCorpus when there is nothing to embed.
std::vector<SubmissionDistance> submission_distances(const std::vector<SessionRecord>& sessions,
                                                     EmbeddingClient& client);

struct CompletionRates {
  double headline = 0, primaryText = 0, description = 0;
};

// Share of submissions with a non-blank field. nullopt (NoSubmissions) for none.
std::optional<CompletionRates> completion_rates(const std::vector<AdDraft>& submissions);

// Score >= 4 counts as believing the partner was an AI. Recognition is 1 when
// that belief matches the actual arm. Throws InvalidSample outside 1..7.
int recognition_code(int score, Arm arm);

struct UserMetrics {
  std::string userId;
  std::string sessionId;
  Arm arm = Arm::HumanHuman;
  std::size_t messageCount = 0;
  std::optional<double> taskOrientedFrac;
  std::optional<double> interpersonalFrac;
  std::size_t copyEdits = 0;
  std::size_t imageEdits = 0;
  std::size_t aiImagesGenerated = 0;
  std::size_t submissions = 0;
  std::optional<double> delegation;
  std::optional<double> delegationJumpRule;
  std::optional<double> diversity;
  std::optional<CompletionRates> completion;
  std::optional<int> recognition;
};

// One row per human participant. Submissions are team outputs and count for
// every human member of the session. Sessions with a status other than
// Completed are skipped.
std::vector<UserMetrics> user_metrics(const std::vector<SessionRecord>& sessions, const LabelTable& labels,
                                      const std::vector<SubmissionDistance>& distances);

void write_user_metrics_csv(std::ostream& out, const std::vector<UserMetrics>& rows);
void write_distances_csv(std::ostream& out, const std::vector<SubmissionDistance>& rows);

}  // namespace pairit::analytics
