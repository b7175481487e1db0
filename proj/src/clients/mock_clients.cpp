#include <cmath>

#include "pairit/clients/clients.hpp"
#include "pairit/core/error.hpp"
#include "pairit/core/rng.hpp"
#include "pairit/core/text.hpp"

namespace pairit {

std::string ScriptedChatClient::complete(const ChatRequest& request) {
  std::lock_guard lock(mu_);
  requests_.push_back(request);
  if (replies_.empty()) throw Error(ErrorCode::ClientError, "scripted client has no replies");
  const auto& r = replies_[next_ % replies_.size()];
  ++next_;
  return r;
}

GeneratedImageData MockImageClient::generate(const std::string& prompt) {
  if (!available_) throw Error(ErrorCode::ClientError, "image generator unavailable");
  return {content_hash(prompt), "mock-image:" + prompt};
}

Eigen::VectorXd MockEmbeddingClient::embed(const std::string& text) {
  const auto h = content_hash(text);
  Rng rng(std::stoull(h, nullptr, 16));
  Eigen::VectorXd v(dim_);
  for (int i = 0; i < dim_; ++i) v[i] = rng.normal();
  return v / v.norm();
}

Eigen::VectorXd TableEmbeddingClient::embed(const std::string& text) {
  auto it = table_.find(text);
  if (it == table_.end()) throw Error(ErrorCode::ClientError, "no embedding for '" + text + "'");
  return it->second;
}

}  // namespace pairit
