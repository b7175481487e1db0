#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>

#include "pairit/clients/clients.hpp"
#include "pairit/core/clock.hpp"
#include "pairit/core/config.hpp"
#include "pairit/core/replay.hpp"
#include "pairit/sync/blob_store.hpp"
#include "pairit/sync/rebase.hpp"

namespace pairit::sync {

inline constexpr const char* kServerActor = "server";

struct PendingSubmission {
  std::string initiatedBy;
  std::set<std::string> confirms;
  std::int64_t openedAt = 0;
};

using SubmitOutcome = std::variant<Submission, PendingSubmission>;

struct SessionOptions {
  double durationSec = kDefaultSessionSeconds;
  double typingIdleSec = 4.0;
};

// Owns one session's log. Every mutation is serialized through this object: it
// assigns seq, stamps t from the injected clock, and broadcasts each appended
// event to subscribers in seq order.
class Session {
 public:
  using Listener = std::function<void(const Event&)>;

  // Appends a Join for every manifest member at t = 0.
  Session(SessionManifest manifest, const Clock& clock, SessionOptions options = {},
          ImageGenClient* images = nullptr, BlobStore* blobs = nullptr);

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  std::size_t subscribe(Listener fn);
  void unsubscribe(std::size_t id);

  // Throws StaleBeyondRebase, SessionNotActive, UnknownActor, InvalidEvent.
  Event apply_text_edit(const std::string& actor, ClientEdit edit);

  // Throws UnknownImage, SessionNotActive.
  Event select_image(const std::string& actor, const ImageSelection& selection);

  // Appends ImageGenRequest and returns its request id; resolve with
  // finish_image_generation. Throws EmptyPrompt.
  std::string begin_image_generation(const std::string& actor, const std::string& prompt);
  // Appends ImageGenResult, or ImageGenFailed when `image` is empty.
  Event finish_image_generation(const std::string& requestId,
                                const std::optional<GeneratedImageData>& image,
                                const std::string& failure = "GeneratorUnavailable");
  // Begin + synchronous call to the image client. Generator errors become an
  // ImageGenFailed event, never an exception.
  std::pair<Event, Event> request_image_generation(const std::string& actor,
                                                   const std::string& prompt);

  // Throws AgentMayNotSubmit, SessionNotActive.
  SubmitOutcome submit_ad(const std::string& actor);

  Event set_typing(const std::string& actor, bool on);
  Event chat(const std::string& actor, const std::string& text);
  Event survey_answer(const std::string& actor, const std::string& item, nlohmann::json value);
  Event gesture(const std::string& actor, const std::string& name);
  Event leave(const std::string& actor);
  Event close(SessionStatus status, const std::string& cause);

  // Appends an agent-side record (AgentDecision / CanvasSnapshot).
  Event record(const std::string& actor, EventPayload payload);

  // Fires due timers: typing auto-off and the session duration limit.
  void poll();
  // Earliest pending timer instant (clock ms), if any.
  std::optional<std::int64_t> next_timer_ms() const;

  const EventLog& log() const { return log_; }
  const SessionState& state() const { return machine_.state(); }
  const SessionManifest& manifest() const { return manifest_; }
  bool active() const { return state().status == SessionStatus::Active; }
  std::int64_t start_ms() const { return start_ms_; }
  std::int64_t elapsed_ms() const;
  std::int64_t duration_ms() const { return duration_ms_; }
  const std::optional<PendingSubmission>& pending() const { return pending_; }
  BlobStore* blobs() const { return blobs_; }

 private:
  Event append(const std::string& actor, EventPayload payload);
  void require_member(const std::string& actor) const;
  void require_active() const;
  void flush();

  SessionManifest manifest_;
  const Clock& clock_;
  SessionOptions options_;
  ImageGenClient* images_;
  BlobStore* blobs_;
  std::int64_t start_ms_;
  std::int64_t duration_ms_;
  EventLog log_;
  StateMachine machine_;
  std::optional<PendingSubmission> pending_;
  std::map<std::string, std::int64_t> typing_deadline_;
  std::size_t next_request_ = 1;
  std::map<std::size_t, Listener> listeners_;
  std::size_t next_listener_ = 1;
  std::deque<Event> outbox_;
  bool dispatching_ = false;
};

}  // namespace pairit::sync
