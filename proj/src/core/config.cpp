#include "pairit/core/config.hpp"

#include <fstream>

#include "pairit/core/error.hpp"
#include "pairit/core/text.hpp"

namespace pairit {

namespace {

void bad(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::BadConfig, field + ": " + why);
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out, const std::string& prefix = "") {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    bad(prefix + key, "wrong type");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!(pHumanAI >= 0.0 && pHumanAI <= 1.0)) bad("pHumanAI", "must be in [0, 1]");
  if (!(queueTimeoutSec > 0.0)) bad("queueTimeoutSec", "must be > 0");
  if (!(sessionDurationSec > 0.0)) bad("sessionDurationSec", "must be > 0");
  if (!(typingIdleSec > 0.0)) bad("typingIdleSec", "must be > 0");
  if (!(agentTickSec > 0.0)) bad("agentTickSec", "must be > 0");
  if (!(simQueueMinSec >= 0.0 && simQueueMaxSec >= simQueueMinSec)) {
    bad("simQueueMinSec", "delay bounds must satisfy 0 <= min <= max");
  }
  if (!(agent.timeoutSec > 0.0)) bad("agent.timeoutSec", "must be > 0");
  if (agent.retries < 0) bad("agent.retries", "must be >= 0");
  if (!(agent.mockLatencySec >= 0.0)) bad("agent.mockLatencySec", "must be >= 0");
  for (const auto* sel : {&clients.chat, &clients.image, &clients.embed}) {
    if (*sel != "mock" && *sel != "http") bad("clients", "client kind must be 'mock' or 'http'");
  }
  for (std::size_t i = 0; i < stockImageIds.size(); ++i) {
    if (stockImageIds[i].empty()) bad("stockImageIds[" + std::to_string(i) + "]", "empty id");
  }
  if (port < 0 || port > 65535) bad("port", "out of range");
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"pHumanAI", pHumanAI},
          {"queueTimeoutSec", queueTimeoutSec},
          {"sessionDurationSec", sessionDurationSec},
          {"stockImageIds", stockImageIds},
          {"taskText", taskText},
          {"rngSeed", rngSeed},
          {"typingIdleSec", typingIdleSec},
          {"agentTickSec", agentTickSec},
          {"simQueueMinSec", simQueueMinSec},
          {"simQueueMaxSec", simQueueMaxSec},
          {"agent",
           {{"model", agent.model},
            {"temperature", agent.temperature},
            {"timeoutSec", agent.timeoutSec},
            {"retries", agent.retries},
            {"features", agent.features},
            {"mockLatencySec", agent.mockLatencySec}}},
          {"clients", {{"chat", clients.chat}, {"image", clients.image}, {"embed", clients.embed}}},
          {"incentiveText", incentiveText},
          {"host", host},
          {"port", port},
          {"outputDir", outputDir},
          {"joinToken", joinToken}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad("<root>", "config must be a JSON object");
  ExperimentConfig c;
  read(j, "pHumanAI", c.pHumanAI);
  read(j, "queueTimeoutSec", c.queueTimeoutSec);
  read(j, "sessionDurationSec", c.sessionDurationSec);
  if (auto it = j.find("stockImageIds"); it != j.end()) {
    if (!it->is_array() || it->size() != kStockImageCount) {
      bad("stockImageIds", "must list exactly 7 image ids");
    }
    for (std::size_t i = 0; i < kStockImageCount; ++i) c.stockImageIds[i] = (*it)[i].get<std::string>();
  }
  read(j, "taskText", c.taskText);
  read(j, "rngSeed", c.rngSeed);
  read(j, "typingIdleSec", c.typingIdleSec);
  read(j, "agentTickSec", c.agentTickSec);
  read(j, "simQueueMinSec", c.simQueueMinSec);
  read(j, "simQueueMaxSec", c.simQueueMaxSec);
  if (auto it = j.find("agent"); it != j.end()) {
    read(*it, "model", c.agent.model, "agent.");
    read(*it, "temperature", c.agent.temperature, "agent.");
    read(*it, "timeoutSec", c.agent.timeoutSec, "agent.");
    read(*it, "retries", c.agent.retries, "agent.");
    read(*it, "features", c.agent.features, "agent.");
    read(*it, "mockLatencySec", c.agent.mockLatencySec, "agent.");
  }
  if (auto it = j.find("clients"); it != j.end()) {
    read(*it, "chat", c.clients.chat, "clients.");
    read(*it, "image", c.clients.image, "clients.");
    read(*it, "embed", c.clients.embed, "clients.");
  }
  read(j, "incentiveText", c.incentiveText);
  read(j, "host", c.host);
  read(j, "port", c.port);
  read(j, "outputDir", c.outputDir);
  read(j, "joinToken", c.joinToken);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad(path.string(), "cannot open config file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    bad(path.string(), e.what());
  }
  return from_json(j);
}

std::string ExperimentConfig::hash() const { return content_hash(to_json().dump()); }

nlohmann::json SessionManifest::to_json() const {
  nlohmann::json mem = nlohmann::json::array();
  for (const auto& m : members) mem.push_back({{"id", m.id}, {"role", to_string(m.role)}});
  return {{"id", id},
          {"arm", to_string(arm)},
          {"members", mem},
          {"configHash", configHash},
          {"startedAtWallMs", startedAtWallMs},
          {"durationLimitSec", durationLimitSec}};
}

SessionManifest SessionManifest::from_json(const nlohmann::json& j) {
  SessionManifest m;
  m.id = j.at("id").get<std::string>();
  m.arm = arm_from_string(j.at("arm").get<std::string>());
  for (const auto& x : j.at("members")) {
    m.members.push_back({x.at("id").get<std::string>(), role_from_string(x.at("role").get<std::string>())});
  }
  m.configHash = j.at("configHash").get<std::string>();
  m.startedAtWallMs = j.value("startedAtWallMs", std::int64_t{0});
  m.durationLimitSec = j.value("durationLimitSec", kDefaultSessionSeconds);
  return m;
}

}  // namespace pairit
