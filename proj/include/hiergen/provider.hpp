// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#pragma once

#include "hiergen/error.hpp"

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

namespace hiergen {

struct FewShotPair {
    std::string input;
    std::string output;
};

struct PromptRequest {
    std::string system_instruction;
    std::vector<FewShotPair> few_shot_examples;
    std::string payload;
    int max_output_tokens = 4096;
    double temperature = 0.0;
};

enum class FinishReason { complete, truncated, provider_error };

std::string_view to_string(FinishReason r) noexcept;

struct CompletionResponse {
    std::string raw_text;  // empty when finish_reason is provider_error
    FinishReason finish_reason = FinishReason::complete;
    std::map<std::string, std::string> provider_metadata;
};

inline constexpr std::size_t kDefaultContextBudget = 32768;
/// Fraction of the context budget held back when checking fit.
inline constexpr double kContextSafetyMargin = 0.10;

struct ProviderConfig {
    std::string endpoint;          // e.g. https://api.example.com/v1/chat/completions
    std::string model_name;
    std::string api_key_env_var;   // the variable's name, never its value
    std::size_t context_budget_tokens = kDefaultContextBudget;
    int max_retries = 3;
    std::chrono::milliseconds timeout{60000};
    std::chrono::milliseconds retry_backoff{500};  // doubled after each failed attempt
};

/// ceil(bytes / 4). Deterministic and monotone in the text length.
std::size_t estimate_tokens(std::string_view text) noexcept;
/// Everything that is sent: system text, every example pair, payload.
std::size_t estimate_request_tokens(const PromptRequest& request) noexcept;
/// Input estimate plus reserved output must stay within (1 - margin) of the budget.
bool fits_context(const PromptRequest& request, std::size_t budget_tokens) noexcept;

nlohmann::json to_json(const PromptRequest& request);
PromptRequest prompt_request_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CompletionResponse& response);
CompletionResponse completion_response_from_json(const nlohmann::json& j);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/// Hex SHA-256 over the canonical JSON form of the request.
std::string request_hash(const PromptRequest& request);

/// The single model touchpoint. `complete` checks the context budget
/// before anything is sent and turns a provider_error response into
/// ProviderUnavailable; truncated responses are returned to the caller.
class CompletionProvider {
public:
    virtual ~CompletionProvider() = default;

    CompletionResponse complete(const PromptRequest& request);
    virtual std::size_t context_budget() const noexcept = 0;

protected:
    virtual CompletionResponse do_complete(const PromptRequest& request) = 0;
};

/// JSON-over-HTTP chat-completion client with bounded retries.
class HttpProvider final : public CompletionProvider {
public:
    explicit HttpProvider(ProviderConfig config);

    std::size_t context_budget() const noexcept override { return config_.context_budget_tokens; }
    /// Wire attempts made by the last `complete` call.
    int last_attempts() const noexcept { return last_attempts_; }

protected:
    CompletionResponse do_complete(const PromptRequest& request) override;

private:
    ProviderConfig config_;
    int last_attempts_ = 0;
};

/// Appends (request-hash, request, response) lines to a replay file for
/// every call that passes through it.
class RecordingProvider final : public CompletionProvider {
public:
    RecordingProvider(std::shared_ptr<CompletionProvider> inner, std::filesystem::path replay_file);

    std::size_t context_budget() const noexcept override { return inner_->context_budget(); }

protected:
    CompletionResponse do_complete(const PromptRequest& request) override;

private:
    std::shared_ptr<CompletionProvider> inner_;
    std::filesystem::path path_;
    std::mutex mutex_;
};

/// Answers from a replay file by request hash; unknown requests are
/// ProviderUnavailable.
class ReplayProvider final : public CompletionProvider {
public:
    explicit ReplayProvider(const std::filesystem::path& replay_file,
                            std::size_t context_budget = kDefaultContextBudget);

    std::size_t context_budget() const noexcept override { return budget_; }
    std::size_t size() const noexcept { return responses_.size(); }

protected:
    CompletionResponse do_complete(const PromptRequest& request) override;

private:
    std::unordered_map<std::string, CompletionResponse> responses_;
    std::size_t budget_;
};

// ---------------------------------------------------------------------------
// Structured output

inline constexpr std::string_view kOtherCategory = "Other";

using ClassificationMap = std::map<std::string, std::set<std::string>>;

/// Locates the outermost `{...}` span that parses as a JSON object.
std::optional<nlohmann::json> extract_dictionary(std::string_view raw_text);

/// Labels and categories are matched after label normalization and reported
/// in their canonical spelling. Nodes mapped to an empty list are omitted.
ClassificationMap parse_classification(std::string_view raw_text, const std::set<std::string>& allowed_categories);

struct ParsedHierarchy {
    std::vector<std::pair<std::string, std::string>> edges;  // (parent, child), canonical labels
    std::vector<std::string> rejected_labels;                 // hallucinated, first-seen order
    std::vector<std::string> top_level;                       // known labels appearing as top-level keys
    std::set<std::string> mentioned;                          // every known label that appears
};

ParsedHierarchy parse_hierarchy(std::string_view raw_text, const std::set<std::string>& known_nodes);

/// Number of repair re-prompts after the first unusable answer.
inline constexpr int kMaxRepairAttempts = 2;

/// Sends `request`, parses the answer with `parse`, and re-prompts with the
/// parse error appended when the answer is unusable. UnparseableOutput,
/// IllegalCategory and Truncated are retried; anything else propagates.
/// Every provider call made, including failed ones, is added to `calls`.
template <class Parse>
auto complete_structured(CompletionProvider& provider, PromptRequest request, Parse&& parse, int& calls)
    -> decltype(parse(std::string_view{})) {
    const std::string base_payload = request.payload;
    for (int attempt = 0;; ++attempt) {
        ++calls;
        CompletionResponse response = provider.complete(request);
        try {
            if (response.finish_reason == FinishReason::truncated)
                throw Error(ErrorCode::Truncated, "response cut off at max_output_tokens");
            return parse(std::string_view(response.raw_text));
        } catch (const Error& e) {
            const auto code = e.code();
            const bool repairable = code == ErrorCode::UnparseableOutput || code == ErrorCode::IllegalCategory ||
                                    code == ErrorCode::Truncated;
            if (!repairable || attempt >= kMaxRepairAttempts) throw;
            request.payload = base_payload + "\n### previous_error\n" + e.what() +
                              "\nAnswer again with a single JSON dictionary that follows the instructions.\n";
        }
    }
}

} // namespace hiergen
