#include "pairit/fieldkit/rating.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>
#include <thread>

#include "pairit/core/error.hpp"

namespace pairit::fieldkit {

namespace {

constexpr std::string_view kSystem = R"PROMPT(
    You are an expert marketing assistant trained to evaluate the effectiveness of advertisements based on their potential for engagement (e.g., clicks) and conversion (e.g., reading time on the report).

    <task>{task}</task>
    )PROMPT";

constexpr std::string_view kUser = R"PROMPT(
    Evaluate the display ad based on the following criteria, providing a score from 1 to 7 for each:

    1. Text: The text is present, clear, relevant, and engaging. 1 is strongly disagree, 7 is strongly agree.
    2. Image: The image is visually appealing. 1 is strongly disagree, 7 is strongly agree.
    3. Click: I am likely to click on this ad. 1 is strongly disagree, 7 is strongly agree.

    Just provide the ratings for each category with no additional commentary.
    )PROMPT";

constexpr std::string_view kTaskPlaceholder = "{task}";

}  // namespace

RatingSampler::RatingSampler(const std::vector<std::string>& adIds, Rng& rng, RatingSamplerOptions opts) {
  const std::size_t n = adIds.size();
  const std::size_t slots = opts.nSamples * opts.perSample;
  if (n == 0 || opts.nSamples == 0 || opts.perSample == 0) {
    throw Error(ErrorCode::CoverageInfeasible, "no ads or no slots");
  }
  if (slots < opts.minCoverage * n) {
    throw Error(ErrorCode::CoverageInfeasible, std::to_string(slots) + " slots cannot cover " +
                                                   std::to_string(n) + " ads " +
                                                   std::to_string(opts.minCoverage) + " times");
  }
  if (opts.perSample > n) {
    throw Error(ErrorCode::CoverageInfeasible, "a list of " + std::to_string(opts.perSample) +
                                                   " distinct ads needs at least that many ads");
  }
  // Spread the slots as evenly as possible: every ad gets base copies and a
  // random subset gets one more.
  const std::size_t base = slots / n;
  const std::size_t extra = slots % n;
  if (base + (extra > 0 ? 1 : 0) > opts.nSamples) {
    throw Error(ErrorCode::CoverageInfeasible, "an ad would appear twice in one list");
  }

  std::vector<std::string> order = adIds;
  rng.shuffle(std::span<std::string>(order));

  // Laying the copies out ad by ad and dealing slot k to list k mod nSamples
  // puts each ad's copies (at most nSamples of them) in distinct lists.
  samples_.assign(opts.nSamples, {});
  for (auto& s : samples_) s.reserve(opts.perSample);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t copies = base + (i < extra ? 1 : 0);
    for (std::size_t c = 0; c < copies; ++c, ++k) samples_[k % opts.nSamples].push_back(order[i]);
  }
  for (auto& s : samples_) rng.shuffle(std::span<std::string>(s));
  rng.shuffle(std::span<std::vector<std::string>>(samples_));
}

const std::vector<std::string>& RatingSampler::next_for_rater() {
  if (next_ >= samples_.size()) {
    throw Error(ErrorCode::SamplesExhausted, "all " + std::to_string(samples_.size()) + " samples taken");
  }
  return samples_[next_++];
}

CoverageReport coverage(const std::vector<std::string>& adIds,
                        const std::vector<std::vector<std::string>>& samples) {
  std::map<std::string, std::size_t> count;
  for (const auto& id : adIds) count[id] = 0;
  CoverageReport r;
  for (const auto& s : samples) {
    std::set<std::string> seen;
    for (const auto& id : s) {
      if (!seen.insert(id).second) r.repeatsWithinList = true;
      ++count[id];
    }
  }
  r.minCount = count.empty() ? 0 : SIZE_MAX;
  for (const auto& [id, c] : count) {
    r.minCount = std::min(r.minCount, c);
    r.maxCount = std::max(r.maxCount, c);
    if (c == 0) ++r.missing;
  }
  return r;
}

std::string rating_system_prompt(std::string_view task) {
  std::string out(kSystem);
  const auto at = out.find(kTaskPlaceholder);
  out.replace(at, kTaskPlaceholder.size(), task);
  return out;
}

std::string_view rating_user_prompt() { return kUser; }

const nlohmann::json& rating_schema() {
  static const nlohmann::json schema = {
      {"type", "object"},
      {"properties",
       {{"text", {{"type", "integer"}}}, {"image", {{"type", "integer"}}}, {"click", {{"type", "integer"}}}}},
      {"required", {"text", "image", "click"}},
      {"additionalProperties", false}};
  return schema;
}

ChatRequest rating_request(const std::string& imageUrl, std::string_view task) {
  ChatRequest r;
  r.model = kRatingModel;
  r.system = rating_system_prompt(task);
  r.user = std::string(kUser);
  r.imageUrl = imageUrl;
  r.schemaName = "AdPerformanceEvaluation";
  r.schema = rating_schema();
  r.temperature = 0.0;
  return r;
}

std::optional<AiRating> decode_rating(std::string_view content) {
  const auto j = nlohmann::json::parse(content, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  auto item = [&](const char* key) -> std::optional<int> {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer()) return std::nullopt;
    const auto v = it->get<long long>();
    if (v < 1 || v > 7) return std::nullopt;
    return static_cast<int>(v);
  };
  const auto t = item("text"), i = item("image"), c = item("click");
  if (!t || !i || !c) return std::nullopt;
  return AiRating{*t, *i, *c};
}

AiRating ai_rating(const std::string& mockupImageUrl, std::string_view task, ChatCompletionClient& client) {
  const auto request = rating_request(mockupImageUrl, task);
  std::string last;
  for (int attempt = 0; attempt < 2; ++attempt) {
    last = client.complete(request);
    if (auto r = decode_rating(last)) return *r;
  }
  throw Error(ErrorCode::DecodeFailure, "rating out of schema after retry: " + last);
}

std::vector<RatingResult> ai_rating_batch(const std::vector<std::string>& mockupImageUrls,
                                          std::string_view task, ChatCompletionClient& client,
                                          std::size_t maxConcurrent) {
  std::vector<RatingResult> out(mockupImageUrls.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < mockupImageUrls.size(); i = next++) {
      try {
        out[i].rating = ai_rating(mockupImageUrls[i], task, client);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(maxConcurrent, mockupImageUrls.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace pairit::fieldkit
