#pragma once

// CompletionClient over HTTP. The endpoint receives
//
//   POST <REPRO_LLM_ENDPOINT>
//   Authorization: Bearer <REPRO_LLM_API_KEY>
//   {"model": ..., "temperature": ..., "prompt": ...}
//
// and may answer with plain text or JSON carrying the completion in "text",
// "completion", "output" or "choices[0].message.content" / "choices[0].text".
// HTTPS endpoints need the library built with CPPHTTPLIB_OPENSSL_SUPPORT.

#include <cstdlib>
#include <optional>
#include <regex>
#include <string>

#include <httplib.h>

#include "repro/extraction.hpp"

namespace repro {

inline constexpr const char* kEndpointEnv = "REPRO_LLM_ENDPOINT";
inline constexpr const char* kApiKeyEnv = "REPRO_LLM_API_KEY";

struct EndpointUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline EndpointUrl split_endpoint(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw std::invalid_argument("malformed endpoint URL '" + url + "'");
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

inline std::string completion_text_from_body(const std::string& body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    return body;
  }
  if (!j.is_object()) return body;
  for (const char* key : {"text", "completion", "output"})
    if (j.contains(key) && j[key].is_string()) return j[key].get<std::string>();
  if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
    const Json& c = j["choices"][0];
    if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string())
      return c["message"]["content"].get<std::string>();
    if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
  }
  return body;
}

class HttpCompletionClient : public CompletionClient {
 public:
  HttpCompletionClient(std::string endpoint, std::string api_key)
      : url_(split_endpoint(endpoint)), api_key_(std::move(api_key)) {}

  /// Reads REPRO_LLM_ENDPOINT / REPRO_LLM_API_KEY; nullopt when the endpoint
  /// is not set.
  static std::optional<HttpCompletionClient> from_environment() {
    const char* endpoint = std::getenv(kEndpointEnv);
    if (!endpoint || !*endpoint) return std::nullopt;
    const char* key = std::getenv(kApiKeyEnv);
    return HttpCompletionClient(endpoint, key ? key : "");
  }

  std::string complete(const std::string& prompt, const ExtractionConfig& config) override {
    // httplib::Client is not thread-safe; one per call.
    httplib::Client cli(url_.origin);
    if (!cli.is_valid()) throw TransportError("cannot create client for " + url_.origin);
    cli.set_read_timeout(300, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    Json body{{"model", config.model_name}, {"temperature", config.temperature}, {"prompt", prompt}};
    auto res = cli.Post(url_.path, headers, body.dump(), "application/json");
    if (!res) throw TransportError("request to " + url_.origin + url_.path + " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
      throw TransportError("endpoint answered HTTP " + std::to_string(res->status));
    return completion_text_from_body(res->body);
  }

 private:
  EndpointUrl url_;
  std::string api_key_;
};

}  // namespace repro
