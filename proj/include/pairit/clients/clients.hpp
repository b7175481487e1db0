#pragma once

#include <Eigen/Core>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace pairit {

// Provider-agnostic chat completion with a JSON-schema-constrained response.
struct ChatRequest {
  std::string model;
  std::string system;
  std::string user;
  std::optional<std::string> imageUrl;
  std::string schemaName;
  nlohmann::json schema;
  double temperature = 1.0;
};

class ChatCompletionClient {
 public:
  virtual ~ChatCompletionClient() = default;
  // Returns the assistant message content (a JSON document). Throws ClientError.
  virtual std::string complete(const ChatRequest& request) = 0;
};

struct GeneratedImageData {
  std::string id;
  std::string bytes;
};

class ImageGenClient {
 public:
  virtual ~ImageGenClient() = default;
  // Throws ClientError when the generator is unavailable.
  virtual GeneratedImageData generate(const std::string& prompt) = 0;
};

class EmbeddingClient {
 public:
  virtual ~EmbeddingClient() = default;
  virtual Eigen::VectorXd embed(const std::string& text) = 0;
};

// ---- offline implementations -------------------------------------------------

// Replies from a fixed list, round-robin. Records every request.
class ScriptedChatClient final : public ChatCompletionClient {
 public:
  explicit ScriptedChatClient(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(const ChatRequest& request) override;
  const std::vector<ChatRequest>& requests() const { return requests_; }
  std::size_t calls() const { return requests_.size(); }

 private:
  std::vector<std::string> replies_;
  std::vector<ChatRequest> requests_;
  std::size_t next_ = 0;
  std::mutex mu_;
};

// Replies computed by a function of the request.
class FunctionChatClient final : public ChatCompletionClient {
 public:
  using Fn = std::function<std::string(const ChatRequest&)>;
  explicit FunctionChatClient(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(const ChatRequest& request) override { return fn_(request); }

 private:
  Fn fn_;
};

// id = content hash of the prompt.
class MockImageClient final : public ImageGenClient {
 public:
  GeneratedImageData generate(const std::string& prompt) override;
  void set_available(bool on) { available_ = on; }

 private:
  bool available_ = true;
};

// Deterministic hash-to-sphere vectors.
class MockEmbeddingClient final : public EmbeddingClient {
 public:
  explicit MockEmbeddingClient(int dim = 16) : dim_(dim) {}
  Eigen::VectorXd embed(const std::string& text) override;

 private:
  int dim_;
};

// Fixed text -> vector table; unknown text is an error.
class TableEmbeddingClient final : public EmbeddingClient {
 public:
  void set(const std::string& text, Eigen::VectorXd v) { table_[text] = std::move(v); }
  Eigen::VectorXd embed(const std::string& text) override;

 private:
  std::map<std::string, Eigen::VectorXd> table_;
};

// ---- HTTP implementations (OpenAI-compatible wire format) ---------------------

struct HttpEndpoint {
  std::string base;  // e.g. https://api.openai.com/v1
  std::string apiKey;
  double timeoutSec = 30.0;
  int retries = 1;

  // Reads <PREFIX>_API_BASE and <PREFIX>_API_KEY. Missing base -> nullopt.
  static std::optional<HttpEndpoint> from_env(const std::string& prefix);
};

// Builds the JSON body posted to {base}/chat/completions.
nlohmann::json chat_request_body(const ChatRequest& request);

class HttpChatClient final : public ChatCompletionClient {
 public:
  explicit HttpChatClient(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string complete(const ChatRequest& request) override;

 private:
  HttpEndpoint endpoint_;
};

class HttpImageClient final : public ImageGenClient {
 public:
  HttpImageClient(HttpEndpoint endpoint, std::string model = "dall-e-3")
      : endpoint_(std::move(endpoint)), model_(std::move(model)) {}
  GeneratedImageData generate(const std::string& prompt) override;

 private:
  HttpEndpoint endpoint_;
  std::string model_;
};

class HttpEmbeddingClient final : public EmbeddingClient {
 public:
  HttpEmbeddingClient(HttpEndpoint endpoint, std::string model = "text-embedding-3-small")
      : endpoint_(std::move(endpoint)), model_(std::move(model)) {}
  Eigen::VectorXd embed(const std::string& text) override;

 private:
  HttpEndpoint endpoint_;
  std::string model_;
};

// POSTs JSON to base + path with bearer auth; retries on transport errors and 5xx.
nlohmann::json post_json(const HttpEndpoint& endpoint, const std::string& path,
                         const nlohmann::json& body);

std::string base64_decode(const std::string& in);

}  // namespace pairit
