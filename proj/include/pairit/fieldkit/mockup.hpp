#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "pairit/core/types.hpp"

namespace pairit::fieldkit {

struct MockupOptions {
  std::string pageName = "Pairit Research";
  std::string profilePicture = "profile:default";
  std::string shortenedLink = "bit.ly/report";
  std::string callToAction = "Learn more";
};

// Declarative render spec for a social-feed display ad. Lists every element a
// renderer must draw, in display order: profile picture, sponsored tag, close
// button, ad copy, image, shortened link, call to action, then the like,
// comment and share buttons. Empty copy slots are kept and named under
// "missing". Throws MissingImage when the ad has no image selection.
nlohmann::json mockup_export(const AdDraft& ad, const MockupOptions& opts = {});

// The element names mockup_export emits, in order.
const std::vector<std::string>& mockup_element_names();

}  // namespace pairit::fieldkit
