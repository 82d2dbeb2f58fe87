// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "hiergen/provider.hpp"

#include "httplib.h"

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <thread>

namespace hiergen {

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw Error(ErrorCode::ConfigError, "endpoint '" + url + "' must start with http:// or https://");
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

} // namespace

HttpProvider::HttpProvider(ProviderConfig config) : config_(std::move(config)) {
    split_endpoint(config_.endpoint);
    if (config_.max_retries < 0) throw Error(ErrorCode::ConfigError, "max_retries must be non-negative");
}

CompletionResponse HttpProvider::do_complete(const PromptRequest& request) {
    CompletionResponse failure;
    failure.finish_reason = FinishReason::provider_error;
    last_attempts_ = 0;

    const char* key = config_.api_key_env_var.empty() ? nullptr : std::getenv(config_.api_key_env_var.c_str());
    if (key == nullptr || *key == '\0') {
        failure.provider_metadata["error"] = "environment variable '" + config_.api_key_env_var + "' is not set";
        return failure;
    }

    nlohmann::json messages = nlohmann::json::array();
    messages.push_back({{"role", "system"}, {"content", request.system_instruction}});
    for (const auto& ex : request.few_shot_examples) {
        messages.push_back({{"role", "user"}, {"content", ex.input}});
        messages.push_back({{"role", "assistant"}, {"content", ex.output}});
    }
    messages.push_back({{"role", "user"}, {"content", request.payload}});
    const nlohmann::json body = {{"model", config_.model_name},
                                 {"messages", std::move(messages)},
                                 {"max_tokens", request.max_output_tokens},
                                 {"temperature", request.temperature}};
    const std::string body_text = body.dump();

    const Endpoint ep = split_endpoint(config_.endpoint);
    httplib::Client client(ep.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    const httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

    std::string last_error;
    auto backoff = config_.retry_backoff;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        ++last_attempts_;
        auto res = client.Post(ep.path, headers, body_text, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            spdlog::warn("completion attempt {} failed: {}", attempt + 1, last_error);
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            spdlog::warn("completion attempt {} failed: {}", attempt + 1, last_error);
            if (transient_status(res->status)) continue;
            break;
        }
        auto parsed = nlohmann::json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty()) {
            last_error = "malformed completion payload";
            break;
        }
        const auto& choice = parsed["choices"][0];
        CompletionResponse out;
        out.raw_text = choice.value("/message/content"_json_pointer, std::string{});
        const std::string finish = choice.value("finish_reason", std::string("stop"));
        out.finish_reason = finish == "length" ? FinishReason::truncated : FinishReason::complete;
        out.provider_metadata["model"] = parsed.value("model", config_.model_name);
        out.provider_metadata["finish_reason"] = finish;
        out.provider_metadata["attempts"] = std::to_string(last_attempts_);
        return out;
    }
    failure.provider_metadata["error"] = last_error + " after " + std::to_string(last_attempts_) + " attempt(s)";
    return failure;
}

} // namespace hiergen
