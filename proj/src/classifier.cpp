// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "hiergen/classifier.hpp"

#include "hiergen/random.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace hiergen {

void CategorySet::validate() const {
    if (categories.size() < 2) throw Error(ErrorCode::PreconditionFailed, "a category set needs at least 2 categories");
    std::set<std::string> seen;
    for (const auto& c : categories) {
        if (c.empty()) throw Error(ErrorCode::PreconditionFailed, "empty category label");
        if (normalize_label(c) == normalize_label(kOtherCategory))
            throw Error(ErrorCode::PreconditionFailed, "\"Other\" is implicit and must not be listed");
        if (!seen.insert(normalize_label(c)).second)
            throw Error(ErrorCode::PreconditionFailed, "duplicate category '" + c + "'");
    }
}

std::set<std::string> CategorySet::allowed() const {
    std::set<std::string> out(categories.begin(), categories.end());
    out.emplace(kOtherCategory);
    return out;
}

std::size_t CategorySet::rank(const std::string& category) const {
    auto it = std::find(categories.begin(), categories.end(), category);
    return static_cast<std::size_t>(it - categories.begin());
}

CategorySet load_category_file(const std::filesystem::path& path, std::string node_class) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "category file '" + path.string() + "' not readable");
    CategorySet set;
    set.node_class = std::move(node_class);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t");
        set.categories.push_back(line.substr(first, last - first + 1));
    }
    set.validate();
    return set;
}

std::vector<FewShotExample> load_examples_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "examples file '" + path.string() + "' not readable");
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_array())
        throw Error(ErrorCode::SchemaError, "examples file '" + path.string() + "' must hold a JSON list");
    std::vector<FewShotExample> out;
    for (const auto& item : j) {
        if (!item.is_object() || !item.contains("label") || !item.contains("categories"))
            throw Error(ErrorCode::SchemaError, "each example needs 'label' and 'categories'");
        FewShotExample ex;
        ex.node_label = item["label"].get<std::string>();
        for (const auto& c : item["categories"]) ex.assigned_categories.insert(c.get<std::string>());
        if (ex.assigned_categories.empty())
            throw Error(ErrorCode::SchemaError, "example '" + ex.node_label + "' has no categories");
        out.push_back(std::move(ex));
    }
    return out;
}

nlohmann::json to_json(const std::vector<ClassificationResult>& results) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : results)
        arr.push_back({{"node", r.node.str()},
                       {"categories", r.categories},
                       {"consensus_support", r.consensus_support},
                       {"provenance", r.provenance == ResultProvenance::model ? "model" : "human-corrected"},
                       {"flagged", r.flagged}});
    return {{"format_version", 1}, {"results", arr}};
}

std::vector<ClassificationResult> classification_results_from_json(const nlohmann::json& j) {
    try {
        std::vector<ClassificationResult> out;
        for (const auto& item : j.at("results")) {
            ClassificationResult r;
            r.node = NodeId(item.at("node").get<std::string>());
            for (const auto& c : item.at("categories")) r.categories.insert(c.get<std::string>());
            r.consensus_support = item.value("consensus_support", 1.0);
            r.provenance = item.value("provenance", std::string("model")) == "model" ? ResultProvenance::model
                                                                                   : ResultProvenance::human_corrected;
            r.flagged = item.value("flagged", false);
            if (r.categories.empty()) throw Error(ErrorCode::SchemaError, "result for '" + r.node.str() + "' is empty");
            out.push_back(std::move(r));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("classification results: ") + e.what());
    }
}

namespace {

std::string render_list(std::span<const std::string> items) { return nlohmann::json(items).dump(); }

std::vector<std::string> category_list(const CategorySet& categories) {
    std::vector<std::string> out = categories.categories;
    out.emplace_back(kOtherCategory);
    return out;
}

PromptRequest build_request(std::span<const std::string> labels, const CategorySet& categories,
                            std::span<const FewShotExample> examples, const PromptTemplate& tmpl,
                            const ClassifyOptions& options) {
    const std::string cats = render_list(category_list(categories));
    PromptRequest req;
    req.system_instruction = tmpl.system;
    req.max_output_tokens = options.max_output_tokens;
    if (options.mode == PromptMode::few_shot) {
        for (const auto& ex : examples) {
            const std::vector<std::string> one{ex.node_label};
            nlohmann::json answer = {{ex.node_label, ex.assigned_categories}};
            req.few_shot_examples.push_back(
                {fill(tmpl.user, {{"categories", cats}, {"candidates", render_list(one)}}), answer.dump()});
        }
    }
    req.payload = fill(tmpl.user, {{"categories", cats}, {"candidates", render_list(labels)}});
    return req;
}

/// Keeps the Other-exclusivity and per-node cap on a single answer.
std::set<std::string> tidy(std::set<std::string> cats, const CategorySet& categories) {
    if (cats.size() > 1) cats.erase(std::string(kOtherCategory));
    if (cats.size() > kMaxCategoriesPerNode) {
        std::vector<std::string> ordered(cats.begin(), cats.end());
        std::sort(ordered.begin(), ordered.end(),
                  [&](const std::string& a, const std::string& b) { return categories.rank(a) < categories.rank(b); });
        ordered.resize(kMaxCategoriesPerNode);
        cats = std::set<std::string>(ordered.begin(), ordered.end());
    }
    return cats;
}

} // namespace

std::vector<ClassificationResult> classify_batch(std::span<const Node> nodes, const CategorySet& categories,
                                                 std::span<const FewShotExample> examples,
                                                 CompletionProvider& provider, const ClassifyOptions& options) {
    if (nodes.empty()) throw Error(ErrorCode::PreconditionFailed, "no nodes to classify");
    if (options.batch_size == 0) throw Error(ErrorCode::PreconditionFailed, "batch size must be positive");
    if (options.mode == PromptMode::few_shot && examples.empty())
        throw Error(ErrorCode::PreconditionFailed, "few-shot classification needs at least one example");
    categories.validate();
    const std::set<std::string> allowed = categories.allowed();
    for (const auto& ex : examples)
        for (const auto& c : ex.assigned_categories)
            if (!allowed.contains(c))
                throw Error(ErrorCode::PreconditionFailed, "example '" + ex.node_label + "' uses unknown category '" + c + "'");

    const PromptTemplate& tmpl =
        (options.templates ? *options.templates : TemplateSet::defaults()).at(TaskKind::classify);

    std::vector<ClassificationResult> out;
    out.reserve(nodes.size());
    for (std::size_t start = 0; start < nodes.size(); start += options.batch_size) {
        const auto batch = nodes.subspan(start, std::min(options.batch_size, nodes.size() - start));
        std::vector<std::string> labels;
        for (const Node& n : batch) labels.push_back(n.label);

        std::unordered_map<std::string, std::set<std::string>> answers;
        bool failed = false;
        int calls = 0;
        try {
            auto parsed = complete_structured(
                provider, build_request(labels, categories, examples, tmpl, options),
                [&](std::string_view raw) { return parse_classification(raw, allowed); }, calls);
            for (auto& [label, cats] : parsed) answers[normalize_label(label)].insert(cats.begin(), cats.end());
        } catch (const Error& e) {
            if (e.code() == ErrorCode::ProviderUnavailable || e.code() == ErrorCode::ContextOverflow) throw;
            spdlog::warn("classification batch at offset {} unusable after {} call(s): {}", start, calls, e.what());
            failed = true;
        }

        for (const Node& n : batch) {
            ClassificationResult r;
            r.node = n.id;
            auto it = failed ? answers.end() : answers.find(n.normalized_label());
            if (it == answers.end()) {
                r.categories = {std::string(kOtherCategory)};
                r.flagged = true;
            } else {
                r.categories = tidy(it->second, categories);
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<ClassificationResult> classify_all(std::span<const Node> nodes, const CategorySet& categories,
                                               std::span<const FewShotExample> examples,
                                               CompletionProvider& provider, int passes, std::uint64_t seed,
                                               const ClassifyOptions& options) {
    if (passes < 1) throw Error(ErrorCode::PreconditionFailed, "passes must be at least 1");
    if (nodes.empty()) throw Error(ErrorCode::PreconditionFailed, "no nodes to classify");

    std::unordered_map<NodeId, std::size_t> position;
    for (std::size_t i = 0; i < nodes.size(); ++i) position.emplace(nodes[i].id, i);
    std::vector<std::map<std::string, int>> votes(nodes.size());
    std::vector<int> flags(nodes.size(), 0);

    for (int pass = 0; pass < passes; ++pass) {
        std::vector<Node> order(nodes.begin(), nodes.end());
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(pass)));
        rng.shuffle(order);
        for (const auto& r : classify_batch(order, categories, examples, provider, options)) {
            const std::size_t i = position.at(r.node);
            for (const auto& c : r.categories) ++votes[i][c];
            if (r.flagged) ++flags[i];
        }
    }

    const std::string other(kOtherCategory);
    auto by_support = [&](const std::map<std::string, int>& v) {
        return [&](const std::string& a, const std::string& b) {
            if (v.at(a) != v.at(b)) return v.at(a) > v.at(b);
            return categories.rank(a) < categories.rank(b);
        };
    };

    std::vector<ClassificationResult> out;
    out.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& v = votes[i];
        std::vector<std::string> chosen;
        for (const auto& [c, n] : v)
            if (c != other && 2 * n >= passes) chosen.push_back(c);
        if (chosen.empty() && v.contains(other) && 2 * v.at(other) >= passes) chosen.push_back(other);
        if (chosen.empty()) {
            std::vector<std::string> all;
            for (const auto& [c, n] : v) all.push_back(c);
            std::sort(all.begin(), all.end(), by_support(v));
            chosen.push_back(all.front());
        }
        std::sort(chosen.begin(), chosen.end(), by_support(v));
        if (chosen.size() > kMaxCategoriesPerNode) chosen.resize(kMaxCategoriesPerNode);

        ClassificationResult r;
        r.node = nodes[i].id;
        r.categories = std::set<std::string>(chosen.begin(), chosen.end());
        r.consensus_support = static_cast<double>(v.at(chosen.back())) / passes;
        r.flagged = 2 * flags[i] > passes;
        out.push_back(std::move(r));
    }
    return out;
}

double classification_accuracy(std::span<const ClassificationResult> results, const GoldLabels& gold) {
    std::size_t total = 0;
    std::size_t correct = 0;
    for (const auto& r : results) {
        auto it = gold.find(r.node);
        if (it == gold.end()) continue;
        ++total;
        if (it->second == r.categories) ++correct;
    }
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

PromptModeReport compare_prompt_modes(std::span<const Node> nodes, const CategorySet& categories,
                                      std::span<const FewShotExample> examples, CompletionProvider& provider,
                                      const GoldLabels& gold, const ClassifyOptions& options) {
    if (gold.empty()) throw Error(ErrorCode::PreconditionFailed, "prompt-mode comparison needs a gold labelling");
    ClassifyOptions few = options;
    few.mode = PromptMode::few_shot;
    ClassifyOptions zero = options;
    zero.mode = PromptMode::zero_shot;
    const auto few_results = classify_batch(nodes, categories, examples, provider, few);
    const auto zero_results = classify_batch(nodes, categories, {}, provider, zero);

    PromptModeReport report;
    report.few_shot = classification_accuracy(few_results, gold);
    report.zero_shot = classification_accuracy(zero_results, gold);
    for (const Node& n : nodes) report.evaluated += gold.contains(n.id) ? 1 : 0;
    return report;
}

} // namespace hiergen
