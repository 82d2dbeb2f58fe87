// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "hiergen/mock_oracle.hpp"

#include <algorithm>
#include <deque>

namespace hiergen {

std::string_view to_string(CorruptionMode m) noexcept {
    switch (m) {
    case CorruptionMode::wrong_category: return "wrong_category";
    case CorruptionMode::spurious_parent: return "spurious_parent";
    case CorruptionMode::drop_node: return "drop_node";
    }
    return "wrong_category";
}

CorruptionMode corruption_mode_from_string(std::string_view s) {
    if (s == "wrong_category") return CorruptionMode::wrong_category;
    if (s == "spurious_parent") return CorruptionMode::spurious_parent;
    if (s == "drop_node") return CorruptionMode::drop_node;
    throw Error(ErrorCode::ConfigError, "unknown corruption mode '" + std::string(s) + "'");
}

namespace {

/// Labels of a nested-object hierarchy in first-seen order plus its edges.
struct LabelGraph {
    std::vector<std::string> tops;
    std::vector<std::string> labels;
    std::vector<std::pair<std::string, std::string>> edges;
    std::set<std::string> seen;
    std::set<std::pair<std::string, std::string>> seen_edges;

    void note(const std::string& l) {
        if (seen.insert(l).second) labels.push_back(l);
    }
    void walk(const std::string& parent, const nlohmann::json& sub) {
        if (!sub.is_object()) return;
        for (const auto& [child, grand] : sub.items()) {
            note(child);
            if (seen_edges.emplace(parent, child).second) edges.emplace_back(parent, child);
            walk(child, grand);
        }
    }
    static LabelGraph from(const nlohmann::json& nested) {
        LabelGraph g;
        if (!nested.is_object()) return g;
        for (const auto& [top, sub] : nested.items()) {
            g.tops.push_back(top);
            g.note(top);
            g.walk(top, sub);
        }
        return g;
    }
};

std::vector<std::string> string_list(const nlohmann::json& j) {
    std::vector<std::string> out;
    if (j.is_array())
        for (const auto& v : j)
            if (v.is_string()) out.push_back(v.get<std::string>());
    return out;
}

std::unordered_map<std::string, std::string> known_index(const std::vector<std::string>& labels) {
    std::unordered_map<std::string, std::string> out;
    for (const auto& l : labels) out.emplace(normalize_label(l), l);
    return out;
}

} // namespace

MockOracle::MockOracle(MockOracleConfig config) : config_(std::move(config)) {
    if (!config_.fixture) throw Error(ErrorCode::ConfigError, "mock oracle needs a gold fixture");
    if (config_.noise_rate < 0.0 || config_.noise_rate > 1.0)
        throw Error(ErrorCode::ConfigError, "noise rate must lie in [0, 1]");
    if (config_.zero_shot_noise_rate && (*config_.zero_shot_noise_rate < 0.0 || *config_.zero_shot_noise_rate > 1.0))
        throw Error(ErrorCode::ConfigError, "zero-shot noise rate must lie in [0, 1]");
    const Hierarchy& gold = *config_.fixture;
    for (const Node& n : gold.nodes()) by_label_.emplace(n.normalized_label(), n.id);
    for (const NodeId& root : gold.roots()) {
        const std::string& root_label = gold.node(root).label;
        l1_of_[root].push_back(root_label);
        for (const NodeId& d : gold.descendants(root)) l1_of_[d].push_back(root_label);
    }
}

std::optional<NodeId> MockOracle::gold_id(const std::string& label) const {
    auto it = by_label_.find(normalize_label(label));
    if (it == by_label_.end()) return std::nullopt;
    return it->second;
}

std::unordered_set<NodeId> MockOracle::gold_ancestors(const NodeId& id) const {
    const Hierarchy& gold = *config_.fixture;
    std::unordered_set<NodeId> out;
    std::deque<NodeId> queue{id};
    while (!queue.empty()) {
        NodeId cur = queue.front();
        queue.pop_front();
        for (const NodeId& p : gold.parents(cur))
            if (out.insert(p).second) queue.push_back(p);
    }
    return out;
}

std::vector<std::string> MockOracle::nearest_in(const std::string& label,
                                                const std::unordered_map<std::string, std::string>& known) const {
    std::vector<std::string> out;
    auto id = gold_id(label);
    if (!id) return out;
    const Hierarchy& gold = *config_.fixture;
    std::unordered_set<NodeId> visited{*id};
    std::deque<NodeId> queue{*id};
    while (!queue.empty()) {
        NodeId cur = queue.front();
        queue.pop_front();
        for (const NodeId& p : gold.parents(cur)) {
            if (!visited.insert(p).second) continue;
            auto k = known.find(gold.node(p).normalized_label());
            if (k != known.end()) {
                if (std::find(out.begin(), out.end(), k->second) == out.end()) out.push_back(k->second);
            } else {
                queue.push_back(p);
            }
        }
    }
    return out;
}

CompletionResponse MockOracle::do_complete(const PromptRequest& request) {
    ++calls_;
    CompletionResponse response;
    response.provider_metadata["provider"] = "mock";
    for (const auto& needle : config_.fail_when_contains) {
        if (!needle.empty() && request.payload.find(needle) != std::string::npos) {
            response.finish_reason = FinishReason::provider_error;
            response.provider_metadata["error"] = "injected failure";
            return response;
        }
    }

    const PromptSections sections = parse_sections(request.payload);
    Rng rng(mix_seed(config_.seed, fnv1a64(to_json(request).dump())));
    const double eps = request.few_shot_examples.empty() && config_.zero_shot_noise_rate
                           ? *config_.zero_shot_noise_rate
                           : config_.noise_rate;
    if (!sections.kind) {
        response.raw_text = "I could not find a task in this request.";
        return response;
    }
    switch (*sections.kind) {
    case TaskKind::classify: response.raw_text = answer_classify(sections, eps, rng); break;
    case TaskKind::place:
    case TaskKind::correct: response.raw_text = answer_place(sections, eps, rng); break;
    case TaskKind::level: response.raw_text = answer_level(sections, eps, rng); break;
    case TaskKind::route: response.raw_text = answer_route(sections, eps, rng); break;
    case TaskKind::review: response.raw_text = answer_review(sections, false, eps, rng); break;
    case TaskKind::evaluate: response.raw_text = answer_review(sections, true, eps, rng); break;
    }
    return response;
}

std::string MockOracle::answer_classify(const PromptSections& s, double eps, Rng& rng) const {
    const auto categories = string_list(s.json("categories"));
    const auto nodes = string_list(s.json("nodes"));
    const auto allowed = known_index(categories);
    std::vector<std::string> real;
    for (const auto& c : categories)
        if (c != kOtherCategory) real.push_back(c);

    nlohmann::json out = nlohmann::json::object();
    for (const auto& label : nodes) {
        std::vector<std::string> gold;
        if (auto id = gold_id(label); id && l1_of_.contains(*id)) {
            for (const auto& l1 : l1_of_.at(*id)) {
                auto it = allowed.find(normalize_label(l1));
                if (it != allowed.end() && it->second != kOtherCategory && normalize_label(l1) != normalize_label(label))
                    gold.push_back(it->second);
            }
        }
        if (gold.empty()) gold.emplace_back(kOtherCategory);

        if (rng.bernoulli(eps)) {
            if (config_.corruption_mode == CorruptionMode::drop_node) continue;
            std::vector<std::string> others;
            for (const auto& c : real)
                if (std::find(gold.begin(), gold.end(), c) == gold.end()) others.push_back(c);
            gold = {others.empty() ? std::string(kOtherCategory) : others[rng.index(others.size())]};
        }
        out[label] = gold;
    }
    return out.dump();
}

std::string MockOracle::answer_place(const PromptSections& s, double eps, Rng& rng) const {
    const LabelGraph existing = LabelGraph::from(s.json("existing_hierarchy"));
    const auto candidates = string_list(s.json("candidates"));
    std::vector<std::string> order = existing.labels;
    for (const auto& c : candidates)
        if (std::find(order.begin(), order.end(), c) == order.end()) order.push_back(c);
    const auto known = known_index(order);

    std::unordered_map<std::string, std::vector<std::string>> parents;
    for (const auto& label : order) parents[label] = nearest_in(label, known);

    std::set<std::string> dropped;
    for (const auto& c : candidates) {
        if (!rng.bernoulli(eps)) continue;
        if (config_.corruption_mode == CorruptionMode::drop_node) {
            dropped.insert(c);
            continue;
        }
        if (order.size() < 2) continue;
        std::string spurious = order[rng.index(order.size())];
        if (spurious == c) spurious = order[(std::find(order.begin(), order.end(), c) - order.begin() + 1) % order.size()];
        auto& ps = parents[c];
        if (ps.empty()) ps.push_back(spurious);
        else ps.front() = spurious;
    }

    std::unordered_map<std::string, std::vector<std::string>> children;
    for (const auto& label : order) {
        if (dropped.contains(label)) continue;
        for (const auto& p : parents[label])
            if (!dropped.contains(p)) children[p].push_back(label);
    }

    std::vector<std::string> tops = existing.tops;
    std::set<std::string> reached;
    std::deque<std::string> queue(tops.begin(), tops.end());
    reached.insert(tops.begin(), tops.end());
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        for (const auto& c : children[cur])
            if (reached.insert(c).second) queue.push_back(c);
    }
    for (const auto& label : order)
        if (!dropped.contains(label) && !reached.contains(label)) {
            tops.push_back(label);
            reached.insert(label);
        }

    return nest_labels(tops, [&](const std::string& l) {
               auto it = children.find(l);
               return it == children.end() ? std::vector<std::string>{} : it->second;
           })
        .dump();
}

std::string MockOracle::answer_level(const PromptSections& s, double eps, Rng& rng) const {
    const std::string parent = s.json("parent").get<std::string>();
    const auto nodes = string_list(s.json("nodes"));
    const auto parent_id = gold_id(parent);
    const Hierarchy& gold = *config_.fixture;

    nlohmann::json out = nlohmann::json::object();
    for (const auto& label : nodes) {
        bool keep = false;
        if (auto id = gold_id(label); id && parent_id) keep = gold.has_edge(*parent_id, *id);
        if (rng.bernoulli(eps)) {
            if (config_.corruption_mode == CorruptionMode::drop_node) continue;
            keep = !keep;
        }
        out[label] = keep ? "keep" : "defer";
    }
    return out.dump();
}

std::string MockOracle::answer_route(const PromptSections& s, double eps, Rng& rng) const {
    const auto level_nodes = string_list(s.json("level_nodes"));
    const auto nodes = string_list(s.json("nodes"));
    std::vector<std::optional<NodeId>> level_ids;
    for (const auto& l : level_nodes) level_ids.push_back(gold_id(l));

    nlohmann::json out = nlohmann::json::object();
    for (const auto& label : nodes) {
        std::vector<std::string> targets;
        if (auto id = gold_id(label)) {
            const auto ancestors = gold_ancestors(*id);
            for (std::size_t i = 0; i < level_nodes.size(); ++i)
                if (level_ids[i] && *level_ids[i] != *id && ancestors.contains(*level_ids[i]))
                    targets.push_back(level_nodes[i]);
        }
        if (rng.bernoulli(eps)) {
            if (config_.corruption_mode == CorruptionMode::drop_node) continue;
            if (!level_nodes.empty()) targets = {level_nodes[rng.index(level_nodes.size())]};
        }
        out[label] = targets;
    }
    return out.dump();
}

std::string MockOracle::answer_review(const PromptSections& s, bool evaluate, double eps, Rng& rng) const {
    const LabelGraph reviewed = LabelGraph::from(s.json("existing_hierarchy"));
    const auto known = known_index(reviewed.labels);
    const Hierarchy& gold = *config_.fixture;

    std::unordered_map<std::string, std::set<std::string>> current_parents;
    for (const auto& [p, c] : reviewed.edges) current_parents[c].insert(p);

    nlohmann::json findings = nlohmann::json::array();
    for (const auto& [p, c] : reviewed.edges) {
        const auto pid = gold_id(p);
        const auto cid = gold_id(c);
        if (!pid || !cid) continue;
        const auto expected = nearest_in(c, known);
        const bool fine = std::any_of(expected.begin(), expected.end(),
                                      [&](const std::string& e) { return normalize_label(e) == normalize_label(p); });
        if (fine) continue;

        nlohmann::json suggested = nullptr;
        for (const auto& e : expected)
            if (!current_parents[c].contains(e)) {
                suggested = e;
                break;
            }

        std::string kind = "wrong_parent";
        if (gold_ancestors(*cid).contains(*pid) || gold_ancestors(*pid).contains(*cid)) {
            kind = "level_misplacement";
        } else {
            const auto cp = gold.parents(*cid);
            const auto pp = gold.parents(*pid);
            if (std::any_of(cp.begin(), cp.end(),
                            [&](const NodeId& x) { return std::find(pp.begin(), pp.end(), x) != pp.end(); }))
                kind = "sibling_confusion";
        }

        if (rng.bernoulli(eps)) {
            if (config_.corruption_mode == CorruptionMode::drop_node) continue;
            suggested = reviewed.labels[rng.index(reviewed.labels.size())];
        }
        std::string rationale = "'" + c + "' is not a narrower concept of '" + p + "'";
        if (suggested.is_string()) rationale += "; it belongs under '" + suggested.get<std::string>() + "'";
        findings.push_back({{"kind", kind},
                            {"node", c},
                            {"current_parent", p},
                            {"suggested_parent", suggested},
                            {"rationale", rationale}});
    }
    nlohmann::json out = {{"verdict", findings.empty() ? "approved" : "needs_changes"}, {"findings", findings}};
    if (evaluate) out["evaluation"] = true;
    return out.dump();
}

std::unique_ptr<CompletionProvider> make_provider(const ProviderConfig& config) {
    return std::make_unique<HttpProvider>(config);
}

std::unique_ptr<CompletionProvider> make_provider(const MockOracleConfig& config) {
    return std::make_unique<MockOracle>(config);
}

} // namespace hiergen
