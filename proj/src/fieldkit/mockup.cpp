#include "pairit/fieldkit/mockup.hpp"

#include "pairit/core/error.hpp"
#include "pairit/core/text.hpp"

namespace pairit::fieldkit {

const std::vector<std::string>& mockup_element_names() {
  static const std::vector<std::string> names = {
      "profilePicture", "sponsoredTag", "closeButton",  "adCopy",        "image",
      "shortenedLink",  "callToAction", "likeButton",   "commentButton", "shareButton"};
  return names;
}

nlohmann::json mockup_export(const AdDraft& ad, const MockupOptions& opts) {
  if (!ad.image) throw Error(ErrorCode::MissingImage, "ad has no image selection");

  nlohmann::json missing = nlohmann::json::array();
  auto slot = [&](const char* name, const std::string& text) {
    if (trim(text).empty()) missing.push_back(name);
    return text;
  };
  nlohmann::json copy = {{"headline", slot("headline", ad.headline)},
                         {"primaryText", slot("primaryText", ad.primaryText)},
                         {"description", slot("description", ad.description)}};

  nlohmann::json elements = nlohmann::json::array();
  auto element = [&](const std::string& name, nlohmann::json props) {
    props["name"] = name;
    elements.push_back(std::move(props));
  };
  element("profilePicture", {{"src", opts.profilePicture}, {"pageName", opts.pageName}});
  element("sponsoredTag", {{"label", "Sponsored"}});
  element("closeButton", {{"label", "Close"}});
  element("adCopy", copy);
  element("image", {{"ref", image_ref(*ad.image)}});
  element("shortenedLink", {{"text", opts.shortenedLink}});
  element("callToAction", {{"label", opts.callToAction}});
  element("likeButton", {{"label", "Like"}});
  element("commentButton", {{"label", "Comment"}});
  element("shareButton", {{"label", "Share"}});

  return {{"version", 1}, {"elements", elements}, {"missing", missing}, {"complete", missing.empty()}};
}

}  // namespace pairit::fieldkit
