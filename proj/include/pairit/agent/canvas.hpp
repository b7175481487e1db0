#pragma once

#include <optional>
#include <string>

#include "pairit/core/event.hpp"
#include "pairit/core/replay.hpp"

namespace pairit::agent {

struct RenderedCanvas {
  std::string id;
  std::string bytes;  // may be empty for renderers that only produce ids
};

class CanvasRenderer {
 public:
  virtual ~CanvasRenderer() = default;
  // nullopt when rendering is unavailable.
  virtual std::optional<RenderedCanvas> render(const AdDraft& draft) = 0;
};

// Canonical composite of the selected image and a hash of the draft text, so
// identical screens always yield the same id.
class HeadlessRenderer final : public CanvasRenderer {
 public:
  std::optional<RenderedCanvas> render(const AdDraft& draft) override;
};

// True for events that change what the image area shows.
bool affects_canvas(const Event& e);

// Builds the CanvasSnapshot payload for the current draft. A failed render
// yields a payload with an empty snapshotId.
ev::CanvasSnapshot capture_canvas_snapshot(const SessionState& state, CanvasRenderer& renderer);

}  // namespace pairit::agent
