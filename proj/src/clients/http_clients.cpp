// Eigen must be parsed before <resolv.h> (pulled in by httplib) defines _res.
#include "pairit/clients/clients.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <openssl/evp.h>

#include <cstdlib>
#include <thread>

#include "pairit/core/error.hpp"
#include "pairit/core/text.hpp"

namespace pairit {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix, no trailing slash
};

SplitUrl split_url(const std::string& base) {
  const auto scheme_end = base.find("://");
  const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = base.find('/', host_start);
  SplitUrl out;
  if (path_start == std::string::npos) {
    out.origin = base;
  } else {
    out.origin = base.substr(0, path_start);
    out.prefix = base.substr(path_start);
  }
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

}  // namespace

std::optional<HttpEndpoint> HttpEndpoint::from_env(const std::string& prefix) {
  const char* base = std::getenv((prefix + "_API_BASE").c_str());
  if (base == nullptr || *base == '\0') return std::nullopt;
  HttpEndpoint e;
  e.base = base;
  if (const char* key = std::getenv((prefix + "_API_KEY").c_str())) e.apiKey = key;
  return e;
}

nlohmann::json post_json(const HttpEndpoint& endpoint, const std::string& path,
                         const nlohmann::json& body) {
  const auto url = split_url(endpoint.base);
  httplib::Client cli(url.origin);
  const auto secs = static_cast<time_t>(endpoint.timeoutSec);
  const auto usecs = static_cast<time_t>((endpoint.timeoutSec - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!endpoint.apiKey.empty()) headers.emplace("Authorization", "Bearer " + endpoint.apiKey);

  std::string last_error;
  for (int attempt = 0; attempt <= endpoint.retries; ++attempt) {
    auto res = cli.Post(url.prefix + path, headers, body.dump(), "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
    } else if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
    } else if (res->status >= 400) {
      throw Error(ErrorCode::ClientError, "HTTP " + std::to_string(res->status) + ": " + res->body);
    } else {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ClientError, std::string("bad JSON response: ") + e.what());
      }
    }
    if (attempt < endpoint.retries) std::this_thread::sleep_for(std::chrono::milliseconds(200 << attempt));
  }
  throw Error(ErrorCode::ClientError, path + " failed: " + last_error);
}

nlohmann::json chat_request_body(const ChatRequest& request) {
  using nlohmann::json;
  json user;
  if (request.imageUrl) {
    user = json::array({json{{"type", "text"}, {"text", request.user}},
                        json{{"type", "image_url"}, {"image_url", {{"url", *request.imageUrl}}}}});
  } else {
    user = request.user;
  }
  json body = {{"model", request.model},
               {"messages", json::array({json{{"role", "system"}, {"content", request.system}},
                                         json{{"role", "user"}, {"content", user}}})},
               {"temperature", request.temperature}};
  if (!request.schema.is_null()) {
    body["response_format"] = {
        {"type", "json_schema"},
        {"json_schema", {{"name", request.schemaName}, {"schema", request.schema}, {"strict", true}}}};
  }
  return body;
}

std::string HttpChatClient::complete(const ChatRequest& request) {
  const auto res = post_json(endpoint_, "/chat/completions", chat_request_body(request));
  try {
    return res.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ClientError, std::string("unexpected completion shape: ") + e.what());
  }
}

std::string base64_decode(const std::string& in) {
  std::string out(3 * in.size() / 4 + 3, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(in.data()),
                                static_cast<int>(in.size()));
  if (n < 0) throw Error(ErrorCode::ClientError, "invalid base64");
  std::size_t len = static_cast<std::size_t>(n);
  // EVP_DecodeBlock counts padding bytes as output
  if (!in.empty() && in.back() == '=') --len;
  if (in.size() > 1 && in[in.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

GeneratedImageData HttpImageClient::generate(const std::string& prompt) {
  const auto res = post_json(endpoint_, "/images/generations",
                             {{"model", model_}, {"prompt", prompt}, {"n", 1},
                              {"response_format", "b64_json"}});
  try {
    auto bytes = base64_decode(res.at("data").at(0).at("b64_json").get<std::string>());
    return {content_hash(bytes), std::move(bytes)};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ClientError, std::string("unexpected image response: ") + e.what());
  }
}

Eigen::VectorXd HttpEmbeddingClient::embed(const std::string& text) {
  const auto res = post_json(endpoint_, "/embeddings", {{"model", model_}, {"input", text}});
  try {
    const auto& arr = res.at("data").at(0).at("embedding");
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ClientError, std::string("unexpected embedding response: ") + e.what());
  }
}

}  // namespace pairit
