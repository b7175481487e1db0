#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pairit/clients/clients.hpp"
#include "pairit/core/clock.hpp"
#include "pairit/core/config.hpp"
#include "pairit/match/matchmaker.hpp"
#include "pairit/sync/blob_store.hpp"

namespace pairit::service {

struct ClientSet {
  std::unique_ptr<ChatCompletionClient> chat;  // drives the agent
  std::unique_ptr<ImageGenClient> image;
  std::unique_ptr<EmbeddingClient> embed;
};

// Mock or HTTP clients as selected in the config. HTTP clients read
// CHAT_API_*, IMAGE_API_* and EMBED_API_*; a missing base URL is BadConfig.
ClientSet make_clients(const ExperimentConfig& config);

// Per-session files under <outDir>/sessions: <id>.jsonl, appended and flushed
// event by event, and <id>.manifest.json.
std::filesystem::path session_log_path(const std::filesystem::path& outDir, const std::string& sessionId);
std::filesystem::path session_manifest_path(const std::filesystem::path& outDir, const std::string& sessionId);

struct JoinResult {
  std::string participantId;
  std::string status;  // always "queued" on success
};

// The live platform without a transport. Participants join over HTTP, then
// open one frame channel each (WebSocket in the server). All calls are
// serialized on one mutex; sinks are invoked under it and must not block or
// call back into the experiment.
//
// Frames sent to participants never name the partner's role or id: actors
// appear as "you", "partner" or "server", and agent-side records are not
// forwarded.
class Experiment {
 public:
  using FrameSink = std::function<void(const std::string& frame)>;

  Experiment(ExperimentConfig config, const Clock& clock, ClientSet clients, std::filesystem::path outDir);
  ~Experiment();
  Experiment(const Experiment&) = delete;
  Experiment& operator=(const Experiment&) = delete;

  // Body: {"participantId": str, "token": str?, "survey": {item: value}?}.
  // Survey answers are recorded in the session log once a partner is found.
  // Throws BadRequest, Unauthorized, AlreadyAssigned.
  JoinResult join(const nlohmann::json& body);

  // Opens a participant's channel and sends the current frame (queued status or
  // snapshot). Throws NotAssigned for unknown participants.
  std::size_t connect(const std::string& participantId, FrameSink sink);
  void disconnect(std::size_t connection);

  // One client frame {"op": ..., "payload": {...}}. Failures are answered on
  // the same channel with {"type": "error", ...}.
  void handle_frame(std::size_t connection, std::string_view text);

  // Matches queued participants, fires session timers, runs agents, resolves
  // image jobs and closes ended sessions.
  void step();

  std::optional<std::string> log_jsonl(const std::string& sessionId) const;
  nlohmann::json health() const;

  // Marks every active session Excluded with cause ServerShutdown and flushes
  // all logs. Idempotent.
  void shutdown();

  std::vector<std::string> session_ids() const;
  std::optional<std::string> session_of(const std::string& participantId) const;
  const ExperimentConfig& config() const { return config_; }

 private:
  struct Live;
  struct Connection {
    std::string participantId;
    FrameSink sink;
  };

  Live* find_live(const std::string& participantId) const;
  void start_session(const match::SessionPlan& plan);
  void finalize_ended();
  void send_to(const std::string& participantId, const std::string& frame);
  std::string snapshot_frame(const Live& live, const std::string& participantId) const;
  void dispatch(Live& live, const std::string& participantId, const std::string& op,
                const nlohmann::json& payload);

  ExperimentConfig config_;
  const Clock& clock_;
  ClientSet clients_;
  std::filesystem::path out_;
  sync::BlobStore blobs_;
  match::Matchmaker matchmaker_;
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<Live>> sessions_;
  std::map<std::string, nlohmann::json> join_surveys_;
  std::map<std::size_t, Connection> connections_;
  std::size_t next_connection_ = 1;
  bool shut_down_ = false;
};

}  // namespace pairit::service
