#include "pairit/service/experiment.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <fstream>
#include <future>

#include "pairit/agent/driver.hpp"
#include "pairit/agent/mock_agent.hpp"
#include "pairit/core/error.hpp"
#include "pairit/sync/session.hpp"

namespace pairit::service {

namespace {

std::unique_ptr<ChatCompletionClient> chat_client(const ExperimentConfig& c) {
  if (c.clients.chat == "mock") return std::make_unique<agent::ScriptedAgentClient>();
  auto ep = HttpEndpoint::from_env("CHAT");
  if (!ep) throw Error(ErrorCode::BadConfig, "clients.chat: CHAT_API_BASE is not set");
  ep->timeoutSec = c.agent.timeoutSec;
  ep->retries = c.agent.retries;
  return std::make_unique<HttpChatClient>(*ep);
}

std::unique_ptr<ImageGenClient> image_client(const ExperimentConfig& c) {
  if (c.clients.image == "mock") return std::make_unique<MockImageClient>();
  auto ep = HttpEndpoint::from_env("IMAGE");
  if (!ep) throw Error(ErrorCode::BadConfig, "clients.image: IMAGE_API_BASE is not set");
  return std::make_unique<HttpImageClient>(*ep);
}

std::unique_ptr<EmbeddingClient> embed_client(const ExperimentConfig& c) {
  if (c.clients.embed == "mock") return std::make_unique<MockEmbeddingClient>();
  auto ep = HttpEndpoint::from_env("EMBED");
  if (!ep) throw Error(ErrorCode::BadConfig, "clients.embed: EMBED_API_BASE is not set");
  return std::make_unique<HttpEmbeddingClient>(*ep);
}

std::string view_actor(const std::string& actor, const std::string& viewer) {
  if (actor == viewer) return "you";
  if (actor == sync::kServerActor) return "server";
  return "partner";
}

// Event as seen by one participant, or nullopt for records that stay on the
// server (agent reasoning and canvas snapshots).
std::optional<nlohmann::json> client_event(const Event& e, const std::string& viewer) {
  if (e.as<ev::AgentDecision>() || e.as<ev::CanvasSnapshot>()) return std::nullopt;
  auto j = to_json(e);
  j["actor"] = view_actor(e.actor, viewer);
  if (e.as<ev::Join>()) j["payload"] = nlohmann::json::object();
  return nlohmann::json{{"event", j}, {"seq", e.seq}, {"t", e.t}};
}

const nlohmann::json& field(const nlohmann::json& payload, const char* name) {
  const auto it = payload.find(name);
  if (it == payload.end()) throw Error(ErrorCode::BadRequest, std::string("missing payload field '") + name + "'");
  return *it;
}

}  // namespace

ClientSet make_clients(const ExperimentConfig& config) {
  return {chat_client(config), image_client(config), embed_client(config)};
}

std::filesystem::path session_log_path(const std::filesystem::path& outDir, const std::string& sessionId) {
  return outDir / "sessions" / (sessionId + ".jsonl");
}

std::filesystem::path session_manifest_path(const std::filesystem::path& outDir, const std::string& sessionId) {
  return outDir / "sessions" / (sessionId + ".manifest.json");
}

struct ImageJob {
  std::string requestId;
  std::future<std::optional<GeneratedImageData>> result;
};

// Declaration order matters: the driver unsubscribes from the session and
// uses the runner, so it is destroyed first.
struct Experiment::Live {
  std::unique_ptr<sync::Session> session;
  std::ofstream file;
  std::unique_ptr<agent::CompletionRunner> runner;
  std::unique_ptr<agent::AgentDriver> driver;
  std::vector<ImageJob> jobs;
  bool finalized = false;
};

Experiment::Experiment(ExperimentConfig config, const Clock& clock, ClientSet clients,
                       std::filesystem::path outDir)
    : config_(std::move(config)),
      clock_(clock),
      clients_(std::move(clients)),
      out_(std::move(outDir)),
      blobs_(out_ / "blobs"),
      matchmaker_(config_, Rng(config_.rngSeed)) {
  std::filesystem::create_directories(out_ / "sessions");
}

Experiment::~Experiment() {
  shutdown();
  // Image jobs hold references to the image client; let them finish.
  for (auto& [_, live] : sessions_) {
    for (auto& j : live->jobs) j.result.wait();
  }
}

JoinResult Experiment::join(const nlohmann::json& body) {
  std::lock_guard lock(mu_);
  if (shut_down_) throw Error(ErrorCode::SessionNotActive, "server is shutting down");
  if (!body.is_object() || !body.contains("participantId") || !body["participantId"].is_string() ||
      body["participantId"].get<std::string>().empty()) {
    throw Error(ErrorCode::BadRequest, "participantId (non-empty string) is required");
  }
  if (!config_.joinToken.empty() && body.value("token", std::string()) != config_.joinToken) {
    throw Error(ErrorCode::Unauthorized, "bad join token");
  }
  const auto id = body["participantId"].get<std::string>();
  if (body.contains("survey") && !body["survey"].is_object()) {
    throw Error(ErrorCode::BadRequest, "survey must be an object");
  }
  const auto now = clock_.now_ms();
  matchmaker_.assign_arm(id, now);
  matchmaker_.enqueue(id, now);
  if (body.contains("survey")) join_surveys_[id] = body["survey"];
  spdlog::info("participant {} queued", id);
  return {id, "queued"};
}

std::size_t Experiment::connect(const std::string& participantId, FrameSink sink) {
  std::lock_guard lock(mu_);
  if (!matchmaker_.arm_of(participantId)) throw Error(ErrorCode::NotAssigned, participantId);
  const auto id = next_connection_++;
  connections_[id] = {participantId, std::move(sink)};
  if (const Live* live = find_live(participantId)) {
    connections_[id].sink(snapshot_frame(*live, participantId));
  } else {
    connections_[id].sink(nlohmann::json{{"type", "queued"}}.dump());
  }
  return id;
}

void Experiment::disconnect(std::size_t connection) {
  std::lock_guard lock(mu_);
  connections_.erase(connection);
}

Experiment::Live* Experiment::find_live(const std::string& participantId) const {
  for (const auto& [_, live] : sessions_) {
    if (live->session->state().members.contains(participantId)) return live.get();
  }
  return nullptr;
}

void Experiment::send_to(const std::string& participantId, const std::string& frame) {
  for (auto& [_, c] : connections_) {
    if (c.participantId == participantId) c.sink(frame);
  }
}

std::string Experiment::snapshot_frame(const Live& live, const std::string& pid) const {
  const auto& s = *live.session;
  const auto& st = s.state();
  nlohmann::json chat = nlohmann::json::array();
  for (const auto& c : st.chat) chat.push_back({{"t", c.t}, {"from", view_actor(c.actor, pid)}, {"text", c.text}});
  nlohmann::json subs = nlohmann::json::array();
  for (const auto& sub : st.submissions) {
    subs.push_back({{"index", sub.index}, {"ad", to_json(sub.ad)}, {"submittedAt", sub.submittedAt}});
  }
  nlohmann::json confirms = nlohmann::json::array();
  for (const auto& a : st.pendingConfirms) confirms.push_back(view_actor(a, pid));
  bool partner_typing = false;
  for (const auto& [a, on] : st.typing) partner_typing = partner_typing || (a != pid && on);
  const auto remaining = std::max<std::int64_t>(0, s.duration_ms() - s.elapsed_ms());
  auto stock = nlohmann::json::array();
  for (std::size_t k = 0; k < config_.stockImageIds.size(); ++k) {
    stock.push_back({{"ref", image_ref(StockImage{static_cast<int>(k)})}, {"asset", config_.stockImageIds[k]}});
  }
  return nlohmann::json{{"type", "snapshot"},
                        {"sessionId", s.manifest().id},
                        {"lastSeq", st.lastSeq},
                        {"elapsedMs", s.elapsed_ms()},
                        {"remainingMs", st.status == SessionStatus::Active ? remaining : 0},
                        {"status", to_string(st.status)},
                        {"taskText", config_.taskText},
                        {"incentiveText", config_.incentiveText},
                        {"stockImages", stock},
                        {"draft", to_json(st.draft)},
                        {"chat", chat},
                        {"submissions", subs},
                        {"generatedImages", st.generatedImages},
                        {"pendingConfirms", confirms},
                        {"partnerTyping", partner_typing}}
      .dump();
}

void Experiment::start_session(const match::SessionPlan& plan) {
  SessionManifest m;
  m.id = plan.sessionId;
  m.arm = plan.arm;
  for (const auto& h : plan.humans) m.members.push_back({h, Role::Human});
  if (plan.agentId) m.members.push_back({*plan.agentId, Role::Agent});
  m.configHash = config_.hash();
  m.startedAtWallMs = wall_clock_ms();
  m.durationLimitSec = config_.sessionDurationSec;

  auto live = std::make_unique<Live>();
  live->file.open(session_log_path(out_, m.id), std::ios::binary | std::ios::trunc);
  std::ofstream(session_manifest_path(out_, m.id), std::ios::binary) << m.to_json().dump(2) << '\n';

  live->session = std::make_unique<sync::Session>(
      m, clock_, sync::SessionOptions{config_.sessionDurationSec, config_.typingIdleSec}, clients_.image.get(),
      &blobs_);
  // Joins were appended by the constructor, before we could subscribe.
  for (const auto& e : live->session->log().events()) live->file << to_jsonl_line(e) << '\n';
  live->file.flush();

  Live* raw = live.get();
  live->session->subscribe([this, raw](const Event& e) {
    raw->file << to_jsonl_line(e) << '\n';
    raw->file.flush();
    for (auto& [_, c] : connections_) {
      if (!raw->session->state().members.contains(c.participantId)) continue;
      if (auto frame = client_event(e, c.participantId)) c.sink(frame->dump());
    }
  });

  if (plan.agentId) {
    const auto timeout = seconds_to_ms(config_.agent.timeoutSec);
    if (config_.clients.chat == "mock") {
      live->runner = std::make_unique<agent::SimulatedRunner>(
          *clients_.chat, seconds_to_ms(config_.agent.mockLatencySec), timeout);
    } else {
      live->runner = std::make_unique<agent::ThreadedRunner>(*clients_.chat, timeout);
    }
    agent::AgentSettings settings{config_.taskText, config_.agent.features, config_.agent.model,
                                  config_.agent.temperature, seconds_to_ms(config_.agentTickSec)};
    live->driver = std::make_unique<agent::AgentDriver>(*live->session, *plan.agentId, *live->runner, settings);
  }

  for (const auto& h : plan.humans) {
    if (auto it = join_surveys_.find(h); it != join_surveys_.end()) {
      for (const auto& [item, value] : it->second.items()) live->session->survey_answer(h, item, value);
      join_surveys_.erase(it);
    }
  }
  spdlog::info("session {} started ({})", m.id, to_string(m.arm));
  const auto id = m.id;
  sessions_[id] = std::move(live);
  for (const auto& h : plan.humans) send_to(h, snapshot_frame(*sessions_.at(id), h));
}

void Experiment::dispatch(Live& live, const std::string& pid, const std::string& op,
                          const nlohmann::json& payload) {
  auto& s = *live.session;
  if (op == "editText") {
    sync::ClientEdit edit{field_from_string(field(payload, "field").get<std::string>()),
                          field(payload, "position").get<std::size_t>(),
                          payload.value("deleted", std::string()), payload.value("inserted", std::string()),
                          field(payload, "baseSeq").get<std::uint64_t>()};
    s.apply_text_edit(pid, std::move(edit));
  } else if (op == "selectImage") {
    const auto ref = field(payload, "image").get<std::string>();
    const auto sel = parse_image_ref(ref);
    if (!sel) throw Error(ErrorCode::UnknownImage, ref);
    s.select_image(pid, *sel);
  } else if (op == "genImage") {
    const auto rid = s.begin_image_generation(pid, field(payload, "prompt").get<std::string>());
    const auto prompt = field(payload, "prompt").get<std::string>();
    ImageGenClient* images = clients_.image.get();
    live.jobs.push_back({rid, std::async(std::launch::async, [images, prompt]() -> std::optional<GeneratedImageData> {
                           try {
                             return images->generate(prompt);
                           } catch (const std::exception& e) {
                             spdlog::warn("image generation failed: {}", e.what());
                             return std::nullopt;
                           }
                         })});
  } else if (op == "chat") {
    s.chat(pid, field(payload, "text").get<std::string>());
  } else if (op == "typing") {
    s.set_typing(pid, field(payload, "on").get<bool>());
  } else if (op == "submit") {
    s.submit_ad(pid);
  } else if (op == "survey") {
    const auto item = field(payload, "item").get<std::string>();
    s.survey_answer(pid, item, field(payload, "value"));
    if (item == "partner_is_ai") {
      const bool ai = s.manifest().arm == Arm::HumanAI;
      send_to(pid, nlohmann::json{{"type", "reveal"}, {"partner", ai ? "ai" : "human"}}.dump());
    }
  } else if (op == "gesture") {
    s.gesture(pid, field(payload, "name").get<std::string>());
  } else if (op == "leave") {
    s.leave(pid);
    if (s.active()) {
      const auto change = matchmaker_.handle_dropout(s.manifest().id, pid, "Leave", clock_.now_ms());
      s.close(change.status, change.cause);
    }
  } else {
    throw Error(ErrorCode::BadRequest, "unknown op '" + op + "'");
  }
}

void Experiment::handle_frame(std::size_t connection, std::string_view text) {
  std::lock_guard lock(mu_);
  const auto cit = connections_.find(connection);
  if (cit == connections_.end()) return;
  const auto pid = cit->second.participantId;
  std::string op;
  try {
    const auto frame = nlohmann::json::parse(text);
    if (!frame.is_object() || !frame.contains("op")) throw Error(ErrorCode::BadRequest, "frame needs an 'op'");
    op = frame["op"].get<std::string>();
    const auto payload = frame.value("payload", nlohmann::json::object());
    Live* live = find_live(pid);
    if (!live) throw Error(ErrorCode::SessionNotActive, "not in a session yet");
    dispatch(*live, pid, op, payload);
  } catch (const Error& e) {
    cit->second.sink(
        nlohmann::json{{"type", "error"}, {"op", op}, {"code", to_string(e.code())}, {"message", e.what()}}.dump());
  } catch (const nlohmann::json::exception& e) {
    cit->second.sink(nlohmann::json{{"type", "error"}, {"op", op}, {"code", "BadRequest"}, {"message", e.what()}}
                         .dump());
  }
}

void Experiment::step() {
  std::lock_guard lock(mu_);
  if (shut_down_) return;
  const auto now = clock_.now_ms();
  for (const auto& change : matchmaker_.handle_timeouts(now)) {
    send_to(change.id, nlohmann::json{{"type", "status"}, {"status", to_string(change.status)},
                                      {"cause", change.cause}}
                           .dump());
  }
  for (const auto& plan : matchmaker_.match(now).sessions) start_session(plan);

  for (auto& [_, live] : sessions_) {
    for (auto it = live->jobs.begin(); it != live->jobs.end();) {
      if (it->result.wait_for(std::chrono::seconds(0)) != std::future_status::ready) {
        ++it;
        continue;
      }
      live->session->finish_image_generation(it->requestId, it->result.get());
      it = live->jobs.erase(it);
    }
    live->session->poll();
    if (live->driver) live->driver->run_due();
  }
  finalize_ended();
}

void Experiment::finalize_ended() {
  for (auto& [id, live] : sessions_) {
    if (live->finalized || live->session->active()) continue;
    live->finalized = true;
    const auto& st = live->session->state();
    const auto* plan = matchmaker_.session(id);
    if (plan && plan->status == SessionStatus::Active && st.status == SessionStatus::Completed) {
      matchmaker_.complete(id, clock_.now_ms(), st.statusCause);
    }
    live->file.flush();
    spdlog::info("session {} ended: {} ({})", id, to_string(st.status), st.statusCause);
  }
}

std::optional<std::string> Experiment::log_jsonl(const std::string& sessionId) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(sessionId);
  if (it == sessions_.end()) return std::nullopt;
  std::string out;
  for (const auto& e : it->second->session->log().events()) out += to_jsonl_line(e) + "\n";
  return out;
}

nlohmann::json Experiment::health() const {
  std::lock_guard lock(mu_);
  std::size_t active = 0;
  for (const auto& [_, live] : sessions_) active += live->session->active();
  return {{"status", shut_down_ ? "stopping" : "ok"},
          {"queued", matchmaker_.queued()},
          {"activeSessions", active},
          {"sessions", sessions_.size()}};
}

void Experiment::shutdown() {
  std::lock_guard lock(mu_);
  if (shut_down_) return;
  shut_down_ = true;
  for (auto& [id, live] : sessions_) {
    if (live->session->active()) live->session->close(SessionStatus::Excluded, "ServerShutdown");
    live->file.flush();
  }
  finalize_ended();
  spdlog::info("shutdown: {} session logs flushed", sessions_.size());
}

std::vector<std::string> Experiment::session_ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

std::optional<std::string> Experiment::session_of(const std::string& participantId) const {
  std::lock_guard lock(mu_);
  if (const Live* live = find_live(participantId)) return live->session->manifest().id;
  return std::nullopt;
}

}  // namespace pairit::service
