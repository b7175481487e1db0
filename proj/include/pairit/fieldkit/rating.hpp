#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pairit/clients/clients.hpp"
#include "pairit/core/rng.hpp"

namespace pairit::fieldkit {

// ---- rating-survey samples ---------------------------------------------------

struct RatingSamplerOptions {
  std::size_t nSamples = 1300;
  std::size_t perSample = 40;
  std::size_t minCoverage = 3;
};

// Pre-generated rating lists. Each list holds distinct ads in random order and
// every ad appears in at least minCoverage lists. Lists are handed out once
// each, in order, as raters arrive.
class RatingSampler {
 public:
  // Throws CoverageInfeasible when nSamples * perSample < minCoverage * |ads|,
  // when a list cannot hold perSample distinct ads, or when an ad would need
  // more appearances than there are lists.
  RatingSampler(const std::vector<std::string>& adIds, Rng& rng, RatingSamplerOptions opts = {});

  const std::vector<std::vector<std::string>>& samples() const { return samples_; }
  std::size_t remaining() const { return samples_.size() - next_; }

  // Throws SamplesExhausted once every list has been taken.
  const std::vector<std::string>& next_for_rater();

 private:
  std::vector<std::vector<std::string>> samples_;
  std::size_t next_ = 0;
};

// Appearance count per ad across a set of lists, and whether any list repeats
// an ad. Used to audit a sample set independently of how it was built.
struct CoverageReport {
  std::size_t minCount = 0;
  std::size_t maxCount = 0;
  std::size_t missing = 0;
  bool repeatsWithinList = false;
};
CoverageReport coverage(const std::vector<std::string>& adIds,
                        const std::vector<std::vector<std::string>>& samples);

// ---- AI ratings --------------------------------------------------------------

inline constexpr const char* kRatingModel = "gpt-4o-mini-2024-07-18";

struct AiRating {
  int text = 0;
  int image = 0;
  int click = 0;
  bool operator==(const AiRating&) const = default;
};

std::string rating_system_prompt(std::string_view task);
std::string_view rating_user_prompt();
const nlohmann::json& rating_schema();
ChatRequest rating_request(const std::string& imageUrl, std::string_view task);

// Parses a completion; nullopt unless all three items are integers in 1..7.
std::optional<AiRating> decode_rating(std::string_view content);

// One schema-constrained call at temperature 0. An undecodable or out-of-range
// reply is retried once; a second failure throws DecodeFailure.
AiRating ai_rating(const std::string& mockupImageUrl, std::string_view task, ChatCompletionClient& client);

struct RatingResult {
  std::optional<AiRating> rating;
  std::string error;
};

// Rates many mockups with at most maxConcurrent calls in flight. The client
// must be safe to call from several threads. Results keep input order.
std::vector<RatingResult> ai_rating_batch(const std::vector<std::string>& mockupImageUrls,
                                          std::string_view task, ChatCompletionClient& client,
                                          std::size_t maxConcurrent = 4);

}  // namespace pairit::fieldkit
