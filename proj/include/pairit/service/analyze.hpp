#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "pairit/analytics/metrics.hpp"
#include "pairit/stats/models.hpp"

namespace pairit::service {

enum class Stage { Metrics, Models, Field };

// "metrics" | "models" | "field". Throws BadRequest.
Stage stage_from_string(std::string_view s);

struct AnalyzeOptions {
  ChatCompletionClient* labeler = nullptr;  // keyword labeler when null
  EmbeddingClient* embedder = nullptr;      // mock embeddings when null
};

// Every <runDir>/sessions/*.jsonl in file-name order. Throws MissingInputs.
std::vector<analytics::SessionRecord> load_run(const std::filesystem::path& runDir);

struct MetricsBundle {
  std::vector<analytics::SessionRecord> sessions;
  analytics::LabelTable labels;
  std::vector<analytics::SubmissionDistance> distances;
  std::vector<analytics::UserMetrics> users;
};

MetricsBundle compute_metrics(std::vector<analytics::SessionRecord> sessions, const AnalyzeOptions& options = {});

// One row per user: the metric columns, "hai", "session" (text), and the
// demographic controls read from the pre-task survey answers in the log.
stats::DataTable user_table(const MetricsBundle& bundle);

// Runs one stage and writes its outputs under <runDir>/analysis. Returns the
// files written. Reruns on the same inputs produce identical bytes.
//   metrics: user_metrics.csv, distances.csv, labels.csv
//   models:  user_table.csv, arm_effects.txt, recognition_interaction.txt
//   field:   field_metrics.csv, field_models.txt (needs <runDir>/field/{ads,delivery,views}.csv)
std::vector<std::filesystem::path> analyze(const std::filesystem::path& runDir, Stage stage,
                                           const AnalyzeOptions& options = {});

}  // namespace pairit::service
