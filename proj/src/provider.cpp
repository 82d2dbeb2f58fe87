// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "hiergen/provider.hpp"

#include "hiergen/kg.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

namespace hiergen {

std::string_view to_string(FinishReason r) noexcept {
    switch (r) {
    case FinishReason::complete: return "complete";
    case FinishReason::truncated: return "truncated";
    case FinishReason::provider_error: return "provider_error";
    }
    return "provider_error";
}

namespace {

FinishReason finish_reason_from_string(std::string_view s) {
    if (s == "complete") return FinishReason::complete;
    if (s == "truncated") return FinishReason::truncated;
    if (s == "provider_error") return FinishReason::provider_error;
    throw Error(ErrorCode::SchemaError, "unknown finish_reason '" + std::string(s) + "'");
}

} // namespace

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return out.str();
}

std::size_t estimate_tokens(std::string_view text) noexcept { return (text.size() + 3) / 4; }

std::size_t estimate_request_tokens(const PromptRequest& request) noexcept {
    std::size_t total = estimate_tokens(request.system_instruction) + estimate_tokens(request.payload);
    for (const auto& ex : request.few_shot_examples) total += estimate_tokens(ex.input) + estimate_tokens(ex.output);
    return total;
}

bool fits_context(const PromptRequest& request, std::size_t budget_tokens) noexcept {
    const double usable = static_cast<double>(budget_tokens) * (1.0 - kContextSafetyMargin);
    const auto needed = estimate_request_tokens(request) + static_cast<std::size_t>(std::max(0, request.max_output_tokens));
    return static_cast<double>(needed) <= usable;
}

nlohmann::json to_json(const PromptRequest& request) {
    nlohmann::json examples = nlohmann::json::array();
    for (const auto& ex : request.few_shot_examples) examples.push_back({{"input", ex.input}, {"output", ex.output}});
    return {{"system_instruction", request.system_instruction},
            {"few_shot_examples", std::move(examples)},
            {"payload", request.payload},
            {"max_output_tokens", request.max_output_tokens},
            {"temperature", request.temperature}};
}

PromptRequest prompt_request_from_json(const nlohmann::json& j) {
    try {
        PromptRequest r;
        r.system_instruction = j.at("system_instruction").get<std::string>();
        for (const auto& ex : j.at("few_shot_examples"))
            r.few_shot_examples.push_back({ex.at("input").get<std::string>(), ex.at("output").get<std::string>()});
        r.payload = j.at("payload").get<std::string>();
        r.max_output_tokens = j.at("max_output_tokens").get<int>();
        r.temperature = j.at("temperature").get<double>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("prompt request: ") + e.what());
    }
}

nlohmann::json to_json(const CompletionResponse& response) {
    return {{"raw_text", response.raw_text},
            {"finish_reason", to_string(response.finish_reason)},
            {"provider_metadata", response.provider_metadata}};
}

CompletionResponse completion_response_from_json(const nlohmann::json& j) {
    try {
        CompletionResponse r;
        r.raw_text = j.at("raw_text").get<std::string>();
        r.finish_reason = finish_reason_from_string(j.at("finish_reason").get<std::string>());
        r.provider_metadata = j.value("provider_metadata", std::map<std::string, std::string>{});
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("completion response: ") + e.what());
    }
}

std::string request_hash(const PromptRequest& request) { return sha256_hex(to_json(request).dump()); }

CompletionResponse CompletionProvider::complete(const PromptRequest& request) {
    if (request.system_instruction.empty())
        throw Error(ErrorCode::PreconditionFailed, "prompt request needs a system instruction");
    if (!fits_context(request, context_budget()))
        throw Error(ErrorCode::ContextOverflow, "request needs ~" + std::to_string(estimate_request_tokens(request)) +
                                                    " input + " + std::to_string(request.max_output_tokens) +
                                                    " output tokens; budget " + std::to_string(context_budget()) +
                                                    " with 10% margin");
    CompletionResponse response = do_complete(request);
    if (response.finish_reason == FinishReason::provider_error) {
        auto it = response.provider_metadata.find("error");
        throw Error(ErrorCode::ProviderUnavailable,
                    it == response.provider_metadata.end() ? "provider reported an error" : it->second);
    }
    return response;
}

RecordingProvider::RecordingProvider(std::shared_ptr<CompletionProvider> inner, std::filesystem::path replay_file)
    : inner_(std::move(inner)), path_(std::move(replay_file)) {}

CompletionResponse RecordingProvider::do_complete(const PromptRequest& request) {
    CompletionResponse response;
    try {
        response = inner_->complete(request);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ProviderUnavailable) throw;
        response.finish_reason = FinishReason::provider_error;
        response.provider_metadata["error"] = e.what();
    }
    nlohmann::json line = {{"request_hash", request_hash(request)},
                           {"request", to_json(request)},
                           {"response", to_json(response)}};
    {
        std::lock_guard lock(mutex_);
        std::ofstream out(path_, std::ios::app);
        out << line.dump() << '\n';
    }
    return response;
}

ReplayProvider::ReplayProvider(const std::filesystem::path& replay_file, std::size_t context_budget)
    : budget_(context_budget) {
    std::ifstream in(replay_file);
    if (!in) throw Error(ErrorCode::ConfigError, "replay file '" + replay_file.string() + "' not readable");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("request_hash") || !j.contains("response"))
            throw Error(ErrorCode::SchemaError, replay_file.string() + ":" + std::to_string(line_no) + " malformed");
        responses_[j["request_hash"].get<std::string>()] = completion_response_from_json(j["response"]);
    }
}

CompletionResponse ReplayProvider::do_complete(const PromptRequest& request) {
    auto it = responses_.find(request_hash(request));
    if (it == responses_.end()) {
        CompletionResponse miss;
        miss.finish_reason = FinishReason::provider_error;
        miss.provider_metadata["error"] = "request not present in replay file";
        return miss;
    }
    return it->second;
}

// ---------------------------------------------------------------------------

std::optional<nlohmann::json> extract_dictionary(std::string_view raw) {
    // Try each opening brace in order; the first one whose balanced span
    // parses as an object is the outermost dictionary.
    for (std::size_t start = raw.find('{'); start != std::string_view::npos; start = raw.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        std::size_t end = std::string_view::npos;
        for (std::size_t i = start; i < raw.size(); ++i) {
            const char ch = raw[i];
            if (in_string) {
                if (escaped) escaped = false;
                else if (ch == '\\') escaped = true;
                else if (ch == '"') in_string = false;
                continue;
            }
            if (ch == '"') in_string = true;
            else if (ch == '{') ++depth;
            else if (ch == '}' && --depth == 0) {
                end = i;
                break;
            }
        }
        if (end == std::string_view::npos) continue;
        auto parsed = nlohmann::json::parse(raw.substr(start, end - start + 1), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) return parsed;
    }
    return std::nullopt;
}

namespace {

std::map<std::string, std::string> canonical_index(const std::set<std::string>& labels) {
    std::map<std::string, std::string> out;
    for (const auto& l : labels) out.emplace(normalize_label(l), l);
    return out;
}

const std::string* lookup(const std::map<std::string, std::string>& index, std::string_view label) {
    auto it = index.find(normalize_label(label));
    return it == index.end() ? nullptr : &it->second;
}

} // namespace

ClassificationMap parse_classification(std::string_view raw_text, const std::set<std::string>& allowed) {
    if (allowed.empty() || !allowed.contains(std::string(kOtherCategory)))
        throw Error(ErrorCode::PreconditionFailed, "allowed categories must be non-empty and include Other");
    auto dict = extract_dictionary(raw_text);
    if (!dict) throw Error(ErrorCode::UnparseableOutput, "no dictionary found in model output");
    const auto index = canonical_index(allowed);

    ClassificationMap out;
    for (const auto& [node_label, value] : dict->items()) {
        std::vector<std::string> raw_categories;
        if (value.is_string()) raw_categories.push_back(value.get<std::string>());
        else if (value.is_array()) {
            for (const auto& v : value) {
                if (!v.is_string())
                    throw Error(ErrorCode::UnparseableOutput, "category list for '" + node_label + "' holds a non-string");
                raw_categories.push_back(v.get<std::string>());
            }
        } else {
            throw Error(ErrorCode::UnparseableOutput, "value for '" + node_label + "' is not a category list");
        }
        std::set<std::string> categories;
        for (const auto& c : raw_categories) {
            const std::string* canonical = lookup(index, c);
            if (canonical == nullptr)
                throw Error(ErrorCode::IllegalCategory, "'" + c + "' (for node '" + node_label + "') is not an allowed category");
            categories.insert(*canonical);
        }
        if (!categories.empty()) out[node_label].insert(categories.begin(), categories.end());
    }
    return out;
}

namespace {

struct HierarchyWalker {
    const std::map<std::string, std::string>& index;
    ParsedHierarchy& out;
    std::set<std::pair<std::string, std::string>> seen_edges;
    std::set<std::string> seen_rejected;

    const std::string* resolve(const std::string& label) {
        const std::string* canonical = lookup(index, label);
        if (canonical == nullptr) {
            if (seen_rejected.insert(label).second) out.rejected_labels.push_back(label);
            return nullptr;
        }
        out.mentioned.insert(*canonical);
        return canonical;
    }

    void children(const std::string* parent, const nlohmann::json& value, int depth) {
        if (depth > 64) throw Error(ErrorCode::UnparseableOutput, "hierarchy nested deeper than 64 levels");
        if (value.is_object()) {
            for (const auto& [label, sub] : value.items()) visit(parent, label, sub, depth + 1);
        } else if (value.is_array()) {
            for (const auto& item : value) {
                if (item.is_string()) visit(parent, item.get<std::string>(), nlohmann::json::object(), depth + 1);
                else children(parent, item, depth + 1);
            }
        }
    }

    void visit(const std::string* parent, const std::string& label, const nlohmann::json& sub, int depth) {
        const std::string* child = resolve(label);
        if (parent != nullptr && child != nullptr && *parent != *child) {
            if (seen_edges.emplace(*parent, *child).second) out.edges.emplace_back(*parent, *child);
        }
        children(child, sub, depth);
    }
};

} // namespace

ParsedHierarchy parse_hierarchy(std::string_view raw_text, const std::set<std::string>& known_nodes) {
    if (known_nodes.empty()) throw Error(ErrorCode::PreconditionFailed, "known node set is empty");
    auto dict = extract_dictionary(raw_text);
    if (!dict) throw Error(ErrorCode::UnparseableOutput, "no dictionary found in model output");
    const auto index = canonical_index(known_nodes);
    ParsedHierarchy out;
    HierarchyWalker walker{index, out, {}, {}};
    for (const auto& [label, sub] : dict->items()) {
        const std::string* top = walker.resolve(label);
        if (top != nullptr) out.top_level.push_back(*top);
        walker.children(top, sub, 1);
    }
    return out;
}

} // namespace hiergen
