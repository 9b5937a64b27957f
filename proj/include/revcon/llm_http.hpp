// Chat-completion transport over HTTP, kept out of llm.hpp so test builds
// need neither the HTTP library nor a thread dependency.
#pragma once

#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "revcon/llm.hpp"

namespace revcon {

class HttpChatTransport : public ChatTransport {
public:
  HttpChatTransport(std::string endpoint, std::string api_key, std::string path = "/v1/chat/completions")
      : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), path_(std::move(path)) {}

  std::string complete(const std::string& prompt, const std::string& model_id) override {
    httplib::Client cli(endpoint_);
    cli.set_connection_timeout(30);
    cli.set_read_timeout(120);
    nlohmann::json body{{"model", model_id},
                        {"messages", {{{"role", "user"}, {"content", prompt}}}}};
    httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
    auto res = cli.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw ServiceError("no response from " + endpoint_);
    if (res->status == 401 || res->status == 403)
      throw AuthError("service rejected credentials (status " + std::to_string(res->status) + ")");
    if (res->status == 429) throw RateLimitExhausted("service rate limit (status 429)");
    if (res->status != 200)
      throw ServiceError("service error (status " + std::to_string(res->status) + ")");
    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("choices") || j["choices"].empty() ||
        !j["choices"][0].contains("message"))
      throw ServiceError("unexpected response shape");
    return j["choices"][0]["message"].value("content", "");
  }

private:
  std::string endpoint_;
  std::string api_key_;
  std::string path_;
};

}  // namespace revcon
