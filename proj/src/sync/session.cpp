#include "pairit/sync/session.hpp"

#include <algorithm>

#include "pairit/core/error.hpp"
#include "pairit/core/text.hpp"

namespace pairit::sync {

Session::Session(SessionManifest manifest, const Clock& clock, SessionOptions options,
                 ImageGenClient* images, BlobStore* blobs)
    : manifest_(std::move(manifest)),
      clock_(clock),
      options_(options),
      images_(images),
      blobs_(blobs),
      start_ms_(clock.now_ms()),
      duration_ms_(seconds_to_ms(options.durationSec)) {
  if (!(options.durationSec > 0.0)) throw Error(ErrorCode::BadConfig, "durationSec must be > 0");
  for (const auto& m : manifest_.members) append(m.id, ev::Join{m.role});
}

std::size_t Session::subscribe(Listener fn) {
  listeners_[next_listener_] = std::move(fn);
  return next_listener_++;
}

void Session::unsubscribe(std::size_t id) { listeners_.erase(id); }

std::int64_t Session::elapsed_ms() const { return clock_.now_ms() - start_ms_; }

Event Session::append(const std::string& actor, EventPayload payload) {
  Event e{log_.last_seq() + 1, std::max(log_.last_t(), elapsed_ms()), actor, std::move(payload)};
  if (!machine_.apply(e)) {
    // The state machine refused it; drop the finding state by rebuilding.
    const auto why = machine_.findings().back();
    StateMachine rebuilt;
    for (const auto& x : log_.events()) rebuilt.apply(x);
    machine_ = std::move(rebuilt);
    throw Error(ErrorCode::InvalidEvent, std::string(to_string(why.kind)) + ": " + why.detail);
  }
  log_.append(e);
  outbox_.push_back(e);
  flush();
  return e;
}

void Session::flush() {
  if (dispatching_) return;
  dispatching_ = true;
  while (!outbox_.empty()) {
    const Event e = std::move(outbox_.front());
    outbox_.pop_front();
    // copy: listeners may subscribe/unsubscribe while we dispatch
    auto targets = listeners_;
    for (auto& [_, fn] : targets) fn(e);
  }
  dispatching_ = false;
}

void Session::require_member(const std::string& actor) const {
  if (!state().members.contains(actor) || state().departed.contains(actor)) {
    throw Error(ErrorCode::UnknownActor, actor);
  }
}

void Session::require_active() const {
  if (!active()) throw Error(ErrorCode::SessionNotActive, manifest_.id);
}

Event Session::apply_text_edit(const std::string& actor, ClientEdit edit) {
  require_active();
  require_member(actor);
  if (edit.inserted.empty() && edit.deleted.empty()) {
    throw Error(ErrorCode::InvalidEvent, "edit inserts and deletes nothing");
  }
  rebase(edit, log_.events());
  const auto& text = state().draft.field(edit.field);
  if (edit.position + char_count(edit.deleted) > char_count(text) ||
      !apply_delta(text, edit.position, edit.deleted, edit.inserted)) {
    throw Error(ErrorCode::StaleBeyondRebase, "delta does not apply to current field");
  }
  pending_.reset();
  return append(actor, ev::TextEdit{edit.field, edit.position, edit.inserted, edit.deleted});
}

Event Session::select_image(const std::string& actor, const ImageSelection& selection) {
  require_active();
  require_member(actor);
  if (const auto* s = std::get_if<StockImage>(&selection)) {
    if (s->index < 0 || s->index >= kStockImageCount) {
      throw Error(ErrorCode::UnknownImage, "stock index " + std::to_string(s->index));
    }
  } else if (!state().has_generated(std::get<GeneratedImage>(selection).id)) {
    throw Error(ErrorCode::UnknownImage, std::get<GeneratedImage>(selection).id);
  }
  pending_.reset();
  return append(actor, ev::ImageSelect{selection});
}

std::string Session::begin_image_generation(const std::string& actor, const std::string& prompt) {
  require_active();
  require_member(actor);
  if (trim(prompt).empty()) throw Error(ErrorCode::EmptyPrompt, "image prompt is empty");
  const auto id = "req-" + std::to_string(next_request_++);
  append(actor, ev::ImageGenRequest{id, prompt});
  return id;
}

Event Session::finish_image_generation(const std::string& requestId,
                                       const std::optional<GeneratedImageData>& image,
                                       const std::string& failure) {
  auto it = state().openImageRequests.find(requestId);
  if (it == state().openImageRequests.end()) {
    throw Error(ErrorCode::InvalidEvent, "unknown image request " + requestId);
  }
  const std::string requester = it->second;
  if (!active() || !image) {
    return append(requester, ev::ImageGenFailed{requestId, active() ? failure : "SessionClosed"});
  }
  if (blobs_ != nullptr) blobs_->put(image->id, image->bytes);
  pending_.reset();
  return append(requester, ev::ImageGenResult{requestId, image->id});
}

std::pair<Event, Event> Session::request_image_generation(const std::string& actor,
                                                          const std::string& prompt) {
  const auto id = begin_image_generation(actor, prompt);
  const Event request = log_.back();
  std::optional<GeneratedImageData> image;
  std::string failure = "GeneratorUnavailable";
  if (images_ != nullptr) {
    try {
      image = images_->generate(prompt);
    } catch (const std::exception& e) {
      failure = std::string("GeneratorUnavailable: ") + e.what();
    }
  }
  return {request, finish_image_generation(id, image, failure)};
}

SubmitOutcome Session::submit_ad(const std::string& actor) {
  require_active();
  require_member(actor);
  if (state().is_agent(actor)) throw Error(ErrorCode::AgentMayNotSubmit, actor);
  if (!pending_) pending_ = PendingSubmission{actor, {}, elapsed_ms()};
  append(actor, ev::SubmitConfirm{});
  pending_->confirms = state().pendingConfirms;

  const auto humans = state().humans();
  const bool all = std::all_of(humans.begin(), humans.end(),
                               [&](const std::string& h) { return pending_->confirms.contains(h); });
  if (!all) return *pending_;
  append(actor, ev::SubmissionFinalized{state().draft});
  pending_.reset();
  return state().submissions.back();
}

Event Session::set_typing(const std::string& actor, bool on) {
  require_active();
  require_member(actor);
  if (on) {
    typing_deadline_[actor] = clock_.now_ms() + seconds_to_ms(options_.typingIdleSec);
  } else {
    typing_deadline_.erase(actor);
  }
  return append(actor, ev::TypingIndicator{on});
}

Event Session::chat(const std::string& actor, const std::string& text) {
  require_active();
  require_member(actor);
  if (trim(text).empty()) throw Error(ErrorCode::InvalidEvent, "empty chat message");
  typing_deadline_.erase(actor);
  return append(actor, ev::ChatMessage{text});
}

Event Session::survey_answer(const std::string& actor, const std::string& item, nlohmann::json value) {
  if (!state().members.contains(actor)) throw Error(ErrorCode::UnknownActor, actor);
  return append(actor, ev::SurveyAnswer{item, std::move(value)});
}

Event Session::gesture(const std::string& actor, const std::string& name) {
  require_active();
  require_member(actor);
  return append(actor, ev::UiGesture{name});
}

Event Session::leave(const std::string& actor) {
  require_member(actor);
  typing_deadline_.erase(actor);
  return append(actor, ev::Leave{});
}

Event Session::close(SessionStatus status, const std::string& cause) {
  typing_deadline_.clear();
  pending_.reset();
  return append(kServerActor, ev::StatusChange{status, cause});
}

Event Session::record(const std::string& actor, EventPayload payload) {
  if (!state().members.contains(actor)) throw Error(ErrorCode::UnknownActor, actor);
  return append(actor, std::move(payload));
}

std::optional<std::int64_t> Session::next_timer_ms() const {
  if (!active()) return std::nullopt;
  std::int64_t next = start_ms_ + duration_ms_;
  for (const auto& [_, t] : typing_deadline_) next = std::min(next, t);
  return next;
}

void Session::poll() {
  if (!active()) return;
  const auto now = clock_.now_ms();
  std::vector<std::string> expired;
  for (const auto& [actor, deadline] : typing_deadline_) {
    if (deadline <= now) expired.push_back(actor);
  }
  for (const auto& actor : expired) {
    typing_deadline_.erase(actor);
    auto it = state().typing.find(actor);
    if (it != state().typing.end() && it->second) append(actor, ev::TypingIndicator{false});
  }
  if (now - start_ms_ >= duration_ms_) {
    append(kServerActor, ev::Timeout{});
    close(SessionStatus::Completed, "Duration");
  }
}

}  // namespace pairit::sync
