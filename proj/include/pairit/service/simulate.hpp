#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "pairit/agent/driver.hpp"
#include "pairit/core/config.hpp"
#include "pairit/core/event_log.hpp"
#include "pairit/core/rng.hpp"

namespace pairit::service {

// Scripted behavior for simulated sessions. Humans act at random intervals
// (typing short bursts, chatting, choosing images, sometimes generating one)
// and submit a planned number of ads spread over the session; in human-AI
// sessions the scripted mock agent acts on its normal tick.
struct Scenario {
  std::string name;
  double pHumanAI = 0.5;            // share of sessions that are human-AI
  double baseSubmissions = 4.0;     // mean planned submissions per team
  double submissionEffect = 0.0;    // added to the mean for human-AI teams
  double submissionSd = 1.0;
  double messageEffect = 0.0;       // extra chat share for human-AI humans, in [0, 1)
  double actionGapSec = 25.0;       // mean gap between one human's actions
  double dropoutRate = 0.0;         // human-human sessions where a member leaves early
  double agentLatencySec = 2.0;     // mock completion latency

  nlohmann::json to_json() const;
};

// "hh-basic", "hai-basic" or "mixed"; otherwise a path to a JSON file whose
// keys override the mixed defaults. Throws ScenarioError.
Scenario load_scenario(const std::string& nameOrPath);

struct SimulatedSession {
  SessionManifest manifest;
  EventLog log;
  // Characters each actor inserted, as recorded by the script while it ran.
  std::map<std::string, std::size_t> insertedChars;
  agent::AgentStats agentStats;
};

// One session on a simulated clock, start to end (including the post-task
// survey). Fully determined by the arguments.
SimulatedSession simulate_session(const ExperimentConfig& config, const Scenario& scenario,
                                  const std::string& sessionId, Arm arm, Rng rng);

struct ExperimentRun {
  std::filesystem::path outputDir;
  std::uint64_t seed = 0;
  std::string configHash;
  std::size_t sessionsCompleted = 0;
  std::size_t sessionsExcluded = 0;
};

inline constexpr const char* kCodeVersion = "0.1.0";

// n sessions named sim-00001.. with rng streams split from the seed. Writes
// the per-session logs and manifests, truth.json (script-side inserted
// characters per actor) and run.json. Output bytes depend only on
// (config, scenario, n, seed).
ExperimentRun simulate(const ExperimentConfig& config, const Scenario& scenario, std::size_t n,
                       std::uint64_t seed, const std::filesystem::path& outDir);

}  // namespace pairit::service
