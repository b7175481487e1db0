#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "pairit/core/types.hpp"

namespace pairit {

struct AgentConfig {
  std::string model = "gpt-4o-2024-08-06";
  double temperature = 1.0;
  double timeoutSec = 30.0;
  int retries = 1;
  std::string features;       // fills the agent prompt's features section
  double mockLatencySec = 2.0;  // simulated completion latency for the mock client
};

struct ClientSelection {
  std::string chat = "mock";   // mock | http
  std::string image = "mock";
  std::string embed = "mock";
};

struct ExperimentConfig {
  double pHumanAI = 0.5;
  double queueTimeoutSec = 300.0;
  double sessionDurationSec = kDefaultSessionSeconds;
  std::array<std::string, kStockImageCount> stockImageIds{"stock-0", "stock-1", "stock-2", "stock-3",
                                                          "stock-4", "stock-5", "stock-6"};
  std::string taskText =
      "Create display ads that drive readers to the think tank's report. The greater the number "
      "of ads, the greater your chances, but not if the ads are of low quality.";
  std::uint64_t rngSeed = 1;
  double typingIdleSec = 4.0;
  double agentTickSec = 10.0;
  double simQueueMinSec = 1.0;  // simulated-queue delay bounds for human-AI
  double simQueueMaxSec = 5.0;
  AgentConfig agent;
  ClientSelection clients;
  std::string incentiveText;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string outputDir = "runs/live";
  std::string joinToken;

  // Throws BadConfig naming the offending field.
  void validate() const;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);

  std::string hash() const;
};

struct ManifestMember {
  std::string id;
  Role role = Role::Human;
};

struct SessionManifest {
  std::string id;
  Arm arm = Arm::HumanHuman;
  std::vector<ManifestMember> members;
  std::string configHash;
  std::int64_t startedAtWallMs = 0;
  double durationLimitSec = kDefaultSessionSeconds;

  nlohmann::json to_json() const;
  static SessionManifest from_json(const nlohmann::json& j);
};

}  // namespace pairit
