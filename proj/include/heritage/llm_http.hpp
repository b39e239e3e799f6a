#pragma once

#include <cstdlib>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "heritage/error.hpp"
#include "heritage/llm_extraction.hpp"

namespace heritage::llm {

// Chat-completions style HTTP client. The API key is only ever read from the
// environment variable named in the configuration.
class HttpBackend final : public LlmBackend {
public:
    HttpBackend(std::string base_url, std::string api_key_env, std::string path = "/v1/chat/completions")
        : base_url_(std::move(base_url)), api_key_env_(std::move(api_key_env)),
          path_(std::move(path)) {}

    std::string id() const override { return "http:" + base_url_; }

    std::string complete(const BackendRequest& request) const override {
        nlohmann::json body;
        body["model"] = request.params.model;
        body["temperature"] = request.params.temperature;
        if (request.params.json_response_format)
            body["response_format"] = {{"type", "json_object"}};
        body["messages"] = nlohmann::json::array(
            {{{"role", "user"},
              {"content",
               nlohmann::json::array(
                   {{{"type", "text"}, {"text", request.prompt}},
                    {{"type", "image_url"},
                     {"image_url",
                      {{"url", "data:image/jpeg;base64," + request.image_b64}}}}})}}});

        httplib::Client client(base_url_);
        client.set_read_timeout(120, 0);
        httplib::Headers headers;
        if (!api_key_env_.empty()) {
            const char* key = std::getenv(api_key_env_.c_str());
            require(key != nullptr, "llm/no-api-key",
                    "environment variable " + api_key_env_ + " is not set");
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
        const auto res = client.Post(path_, headers, body.dump(), "application/json");
        require(res != nullptr, "llm/transport",
                "no response from " + base_url_ + path_ + " (" +
                    httplib::to_string(res.error()) + ")");
        require(res->status == 200, "llm/http-status",
                base_url_ + path_ + " returned status " + std::to_string(res->status) + ": " +
                    res->body);
        try {
            const auto j = nlohmann::json::parse(res->body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw Error("llm/bad-completion", std::string("unexpected completion payload: ") +
                                                  e.what());
        }
    }

private:
    std::string base_url_;
    std::string api_key_env_;
    std::string path_;
};

}  // namespace heritage::llm
