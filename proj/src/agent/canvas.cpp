#include "pairit/agent/canvas.hpp"

#include <nlohmann/json.hpp>

#include "pairit/core/text.hpp"

namespace pairit::agent {

std::optional<RenderedCanvas> HeadlessRenderer::render(const AdDraft& draft) {
  const std::string ref = draft.image ? image_ref(*draft.image) : "none";
  const std::string text_hash =
      content_hash(draft.headline + "\n" + draft.primaryText + "\n" + draft.description);
  RenderedCanvas out;
  out.id = content_hash(ref + "|" + text_hash);
  out.bytes = nlohmann::json{{"image", ref}, {"text", text_hash}}.dump();
  return out;
}

bool affects_canvas(const Event& e) {
  return std::holds_alternative<ev::ImageSelect>(e.payload) ||
         std::holds_alternative<ev::ImageGenResult>(e.payload) ||
         std::holds_alternative<ev::SubmissionFinalized>(e.payload);
}

ev::CanvasSnapshot capture_canvas_snapshot(const SessionState& state, CanvasRenderer& renderer) {
  ev::CanvasSnapshot snap;
  snap.imageRef = state.draft.image ? image_ref(*state.draft.image) : "";
  std::optional<RenderedCanvas> rendered;
  try {
    rendered = renderer.render(state.draft);
  } catch (const std::exception&) {
    rendered.reset();
  }
  if (rendered) snap.snapshotId = rendered->id;
  return snap;
}

}  // namespace pairit::agent
