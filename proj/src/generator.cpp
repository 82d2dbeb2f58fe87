// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "hiergen/generator.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <deque>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace hiergen {

std::string_view to_string(Strategy s) noexcept { return s == Strategy::one_shot ? "one_shot" : "cyclical"; }

Strategy strategy_from_string(std::string_view s) {
    if (s == "one_shot") return Strategy::one_shot;
    if (s == "cyclical") return Strategy::cyclical;
    throw Error(ErrorCode::SchemaError, "unknown strategy '" + std::string(s) + "'");
}

std::string_view to_string(FindingKind k) noexcept {
    switch (k) {
    case FindingKind::wrong_parent: return "wrong_parent";
    case FindingKind::sibling_confusion: return "sibling_confusion";
    case FindingKind::level_misplacement: return "level_misplacement";
    }
    return "wrong_parent";
}

std::optional<FindingKind> finding_kind_from_string(std::string_view s) noexcept {
    if (s == "wrong_parent") return FindingKind::wrong_parent;
    if (s == "sibling_confusion") return FindingKind::sibling_confusion;
    if (s == "level_misplacement") return FindingKind::level_misplacement;
    return std::nullopt;
}

nlohmann::json to_json(const HierarchyDelta& delta) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [p, c] : delta.edges_added) edges.push_back({{"parent", p.str()}, {"child", c.str()}});
    nlohmann::json unplaced = nlohmann::json::array();
    for (const auto& id : delta.unplaced) unplaced.push_back(id.str());
    nlohmann::json base = nlohmann::json::array();
    for (const auto& [p, c] : delta.base_edges) base.push_back({{"parent", p.str()}, {"child", c.str()}});
    return {{"format_version", 1},
            {"l1_category", delta.l1_category.str()},
            {"base_fingerprint", delta.base_fingerprint},
            {"base_edges", std::move(base)},
            {"strategy", to_string(delta.strategy_used)},
            {"passes", delta.passes},
            {"edges", std::move(edges)},
            {"unplaced", std::move(unplaced)},
            {"rejected_labels", delta.rejected_labels}};
}

HierarchyDelta delta_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format_version").get<int>() != 1)
            throw Error(ErrorCode::UnsupportedVersion, "delta format_version " + j.at("format_version").dump());
        HierarchyDelta d;
        d.l1_category = NodeId(j.at("l1_category").get<std::string>());
        d.base_fingerprint = j.at("base_fingerprint").get<std::string>();
        for (const auto& e : j.at("base_edges"))
            d.base_edges.emplace_back(NodeId(e.at("parent").get<std::string>()), NodeId(e.at("child").get<std::string>()));
        if (edges_fingerprint(d.l1_category, d.base_edges) != d.base_fingerprint)
            throw Error(ErrorCode::SchemaError, "delta base edges do not match its fingerprint");
        d.strategy_used = strategy_from_string(j.at("strategy").get<std::string>());
        d.passes = j.at("passes").get<int>();
        for (const auto& e : j.at("edges"))
            d.edges_added.emplace_back(NodeId(e.at("parent").get<std::string>()), NodeId(e.at("child").get<std::string>()));
        for (const auto& u : j.at("unplaced")) d.unplaced.insert(NodeId(u.get<std::string>()));
        d.rejected_labels = j.at("rejected_labels").get<std::vector<std::string>>();
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("delta: ") + e.what());
    }
}

std::vector<EdgePair> subgraph_edges(const Hierarchy& kg, const NodeId& l1) {
    std::vector<EdgePair> edges;
    for (const Edge& e : kg.subgraph(l1).edges()) edges.emplace_back(e.parent, e.child);
    std::sort(edges.begin(), edges.end());
    return edges;
}

std::string edges_fingerprint(const NodeId& l1, const std::vector<EdgePair>& sorted_edges) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [p, c] : sorted_edges) edges.push_back({p.str(), c.str()});
    return sha256_hex(nlohmann::json{{"root", l1.str()}, {"edges", std::move(edges)}}.dump());
}

namespace {

const TemplateSet& templates_of(const GeneratorOptions& o) { return o.templates ? *o.templates : TemplateSet::defaults(); }

/// Normalized label -> node id over a working graph; first node wins.
class LabelIndex {
public:
    void add(const Node& n) { by_label_.emplace(n.normalized_label(), n.id); }
    const NodeId* find(std::string_view label) const {
        auto it = by_label_.find(normalize_label(label));
        return it == by_label_.end() ? nullptr : &it->second;
    }

private:
    std::unordered_map<std::string, NodeId> by_label_;
};

/// Working copy of one category: the existing subgraph plus candidates.
struct Workspace {
    NodeId root;
    Hierarchy graph;
    std::vector<NodeId> candidates;
    std::unordered_set<NodeId> candidate_set;
    LabelIndex labels;
    std::vector<std::string> rejected;
    std::set<std::string> rejected_seen;

    void add_candidate(const Node& n) {
        graph.register_class(n.node_class);
        graph.add_node(n);
        labels.add(n);
    }

    void note_rejected(const std::vector<std::string>& labels_in) {
        for (const auto& l : labels_in)
            if (rejected_seen.insert(l).second) rejected.push_back(l);
    }

    std::set<std::string> known_labels() const {
        std::set<std::string> out;
        for (const Node& n : graph.nodes()) out.insert(n.label);
        return out;
    }

    bool try_add(const NodeId& parent, const NodeId& child) {
        try {
            return graph.add_edge(parent, child, EdgeProvenance::generated);
        } catch (const Error& e) {
            spdlog::debug("edge rejected: {}", e.what());
            return false;
        }
    }

    std::vector<NodeId> candidate_parents(const NodeId& c) const { return graph.parents(c); }

    HierarchyDelta finish(Strategy s, int passes, std::vector<EdgePair> base_edges) const {
        HierarchyDelta d;
        d.l1_category = root;
        d.base_fingerprint = edges_fingerprint(root, base_edges);
        d.base_edges = std::move(base_edges);
        d.strategy_used = s;
        d.passes = passes;
        d.rejected_labels = rejected;
        for (const NodeId& c : candidates) {
            const auto ps = graph.parents(c);
            if (ps.empty()) d.unplaced.insert(c);
            for (const NodeId& p : ps) d.edges_added.emplace_back(p, c);
        }
        return d;
    }
};

Workspace make_workspace(const Hierarchy& kg, const CandidateSet& cs, bool add_candidates_now) {
    if (!kg.contains(cs.l1_category))
        throw Error(ErrorCode::UnknownNode, "L1 category '" + cs.l1_category.str() + "'");
    if (!kg.is_root(cs.l1_category))
        throw Error(ErrorCode::PreconditionFailed, "'" + cs.l1_category.str() + "' is not an L1 root");
    Workspace ws{cs.l1_category, kg.subgraph(cs.l1_category), {}, {}, {}, {}, {}};
    for (const Node& n : ws.graph.nodes()) ws.labels.add(n);
    for (const NodeId& c : cs.candidates) {
        if (!kg.contains(c)) throw Error(ErrorCode::UnknownNode, "candidate '" + c.str() + "'");
        if (ws.graph.contains(c))
            throw Error(ErrorCode::PreconditionFailed,
                        "candidate '" + c.str() + "' is already in the subgraph of '" + cs.l1_category.str() + "'");
        if (ws.candidate_set.insert(c).second) ws.candidates.push_back(c);
    }
    if (add_candidates_now)
        for (const NodeId& c : ws.candidates) ws.add_candidate(kg.node(c));
    return ws;
}

std::string label_list(const Hierarchy& g, std::span<const NodeId> ids) {
    nlohmann::json arr = nlohmann::json::array();
    for (const NodeId& id : ids) arr.push_back(g.node(id).label);
    return arr.dump();
}

std::string example_placements(const Workspace& ws, std::size_t limit) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Edge& e : ws.graph.edges()) {
        if (arr.size() >= limit) break;
        if (ws.candidate_set.contains(e.child)) continue;
        arr.push_back({{"node", ws.graph.node(e.child).label}, {"parent", ws.graph.node(e.parent).label}});
    }
    return arr.dump();
}

PromptRequest placement_request(TaskKind kind, const Workspace& ws, std::span<const NodeId> movable,
                                const GeneratorOptions& options) {
    const PromptTemplate& tmpl = templates_of(options).at(kind);
    const std::vector<NodeId> top{ws.root};
    PromptRequest req;
    req.system_instruction = tmpl.system;
    req.max_output_tokens = options.max_output_tokens;
    req.payload = fill(tmpl.user, {{"existing_hierarchy", nest_hierarchy(ws.graph, top).dump()},
                                   {"candidates", label_list(ws.graph, movable)},
                                   {"examples", example_placements(ws, options.example_edges)}});
    return req;
}

/// Applies parsed edges whose child is one of `movable`.
void apply_placements(Workspace& ws, const ParsedHierarchy& parsed, const std::unordered_set<NodeId>& movable) {
    ws.note_rejected(parsed.rejected_labels);
    for (const auto& [p_label, c_label] : parsed.edges) {
        const NodeId* p = ws.labels.find(p_label);
        const NodeId* c = ws.labels.find(c_label);
        if (p == nullptr || c == nullptr || !movable.contains(*c)) continue;
        ws.try_add(*p, *c);
    }
}

std::vector<NodeId> order_batch(std::vector<NodeId> batch, const Hierarchy& kg, bool longest_first) {
    if (longest_first)
        std::stable_sort(batch.begin(), batch.end(), [&](const NodeId& a, const NodeId& b) {
            return kg.node(a).label.size() > kg.node(b).label.size();
        });
    return batch;
}

} // namespace

StrategyChoice select_strategy(const Hierarchy& kg, const CandidateSet& cs, std::size_t context_budget,
                               const GeneratorOptions& options) {
    Workspace ws = make_workspace(kg, cs, true);
    const PromptRequest req = placement_request(TaskKind::place, ws, ws.candidates, options);
    StrategyChoice choice;
    choice.estimated_tokens = estimate_request_tokens(req);
    if (ws.candidates.empty()) {
        choice.strategy = Strategy::one_shot;
        choice.reason = "no candidates; nothing to generate";
        return choice;
    }
    if (fits_context(req, context_budget)) {
        choice.strategy = Strategy::one_shot;
        choice.reason = "full rendering (~" + std::to_string(choice.estimated_tokens) + " tokens) fits the " +
                        std::to_string(context_budget) + "-token budget";
    } else {
        choice.strategy = Strategy::cyclical;
        choice.reason = "full rendering (~" + std::to_string(choice.estimated_tokens) + " tokens) exceeds the " +
                        std::to_string(context_budget) + "-token budget";
    }
    return choice;
}

HierarchyDelta generate_one_shot(const Hierarchy& kg, const CandidateSet& cs, CompletionProvider& provider,
                                 const GeneratorOptions& options) {
    if (options.batch_size == 0) throw Error(ErrorCode::PreconditionFailed, "batch size must be positive");
    Workspace ws = make_workspace(kg, cs, false);
    auto base_edges = subgraph_edges(kg, cs.l1_category);
    int calls = 0;
    if (ws.candidates.empty()) return ws.finish(Strategy::one_shot, calls, base_edges);

    std::vector<std::vector<NodeId>> batches;
    for (std::size_t i = 0; i < ws.candidates.size(); i += options.batch_size) {
        const auto end = std::min(ws.candidates.size(), i + options.batch_size);
        batches.push_back(order_batch({ws.candidates.begin() + i, ws.candidates.begin() + end}, kg,
                                      options.longest_label_first));
    }

    for (const auto& batch : batches) {
        for (const NodeId& c : batch) ws.add_candidate(kg.node(c));
        const std::unordered_set<NodeId> movable(batch.begin(), batch.end());
        const auto known = ws.known_labels();
        try {
            const auto parsed = complete_structured(
                provider, placement_request(TaskKind::place, ws, batch, options),
                [&](std::string_view raw) { return parse_hierarchy(raw, known); }, calls);
            apply_placements(ws, parsed, movable);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::UnparseableOutput && e.code() != ErrorCode::Truncated) throw;
            spdlog::warn("placement batch for '{}' unusable: {}", cs.l1_category.str(), e.what());
        }
    }

    if (batches.size() > 1) {
        const auto known = ws.known_labels();
        try {
            const auto parsed = complete_structured(
                provider, placement_request(TaskKind::correct, ws, ws.candidates, options),
                [&](std::string_view raw) { return parse_hierarchy(raw, known); }, calls);
            ws.note_rejected(parsed.rejected_labels);

            // Two phases so that a reparenting never collides with a stale
            // placement of another candidate still waiting to be moved.
            std::map<NodeId, std::vector<NodeId>> proposed;
            for (const auto& label : parsed.mentioned) {
                const NodeId* id = ws.labels.find(label);
                if (id != nullptr && ws.candidate_set.contains(*id)) proposed[*id];
            }
            for (const auto& [p_label, c_label] : parsed.edges) {
                const NodeId* p = ws.labels.find(p_label);
                const NodeId* c = ws.labels.find(c_label);
                if (p != nullptr && c != nullptr && proposed.contains(*c)) proposed[*c].push_back(*p);
            }
            std::map<NodeId, std::vector<NodeId>> previous;
            for (const auto& [c, ps] : proposed) {
                previous[c] = ws.graph.parents(c);
                for (const NodeId& p : previous[c]) ws.graph.remove_edge(p, c);
            }
            for (const auto& [c, ps] : proposed)
                for (const NodeId& p : ps) ws.try_add(p, c);
            for (const auto& [c, ps] : proposed) {
                if (ps.empty() || !ws.graph.parents(c).empty()) continue;
                for (const NodeId& p : previous[c]) ws.try_add(p, c);
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::UnparseableOutput && e.code() != ErrorCode::Truncated) throw;
            spdlog::warn("correction pass for '{}' unusable, keeping batch placements: {}", cs.l1_category.str(),
                         e.what());
        }
    }
    return ws.finish(Strategy::one_shot, calls, base_edges);
}

namespace {

std::map<std::string, nlohmann::json> parse_label_dict(std::string_view raw) {
    auto dict = extract_dictionary(raw);
    if (!dict) throw Error(ErrorCode::UnparseableOutput, "no dictionary found in model output");
    std::map<std::string, nlohmann::json> out;
    for (const auto& [k, v] : dict->items()) out.emplace(k, v);
    return out;
}

} // namespace

HierarchyDelta generate_cyclical(const Hierarchy& kg, const CandidateSet& cs, CompletionProvider& provider,
                                 const GeneratorOptions& options) {
    if (options.max_depth < 2) throw Error(ErrorCode::PreconditionFailed, "max_depth must be at least 2");
    Workspace ws = make_workspace(kg, cs, true);
    auto base_edges = subgraph_edges(kg, cs.l1_category);
    int calls = 0;
    if (ws.candidates.empty()) return ws.finish(Strategy::cyclical, calls, base_edges);

    const TemplateSet& templates = templates_of(options);
    std::unordered_map<NodeId, std::vector<NodeId>> pending;
    std::unordered_map<NodeId, std::unordered_set<NodeId>> processed;
    std::unordered_map<NodeId, int> depth;
    std::unordered_set<NodeId> queued;
    std::deque<NodeId> queue;

    auto route_to = [&](const NodeId& target, const NodeId& candidate, int target_depth) {
        if (processed[target].contains(candidate)) return;
        auto& p = pending[target];
        if (std::find(p.begin(), p.end(), candidate) != p.end()) return;
        p.push_back(candidate);
        depth.try_emplace(target, target_depth);
        if (queued.insert(target).second) queue.push_back(target);
    };
    for (const NodeId& c : ws.candidates) route_to(ws.root, c, 1);

    while (!queue.empty()) {
        const NodeId node = queue.front();
        queue.pop_front();
        queued.erase(node);
        std::vector<NodeId> todo;
        for (const NodeId& c : pending[node])
            if (processed[node].insert(c).second) todo.push_back(c);
        pending[node].clear();
        const int d = depth.at(node);
        if (todo.empty() || d >= options.max_depth) continue;

        const std::string parent_label = nlohmann::json(ws.graph.node(node).label).dump();
        const auto anchors = ws.graph.children(node);
        std::unordered_map<std::string, const NodeId*> todo_by_label;
        for (const NodeId& c : todo) todo_by_label.emplace(ws.graph.node(c).normalized_label(), &c);

        // Membership: only an explicit "keep" attaches a node at this level.
        {
            const PromptTemplate& tmpl = templates.at(TaskKind::level);
            PromptRequest req;
            req.system_instruction = tmpl.system;
            req.max_output_tokens = options.max_output_tokens;
            req.payload = fill(tmpl.user, {{"parent", parent_label},
                                           {"anchors", label_list(ws.graph, anchors)},
                                           {"candidates", label_list(ws.graph, todo)}});
            try {
                const auto answers = complete_structured(provider, req, parse_label_dict, calls);
                for (const auto& [label, verdict] : answers) {
                    auto it = todo_by_label.find(normalize_label(label));
                    if (it == todo_by_label.end()) {
                        if (!ws.labels.find(label)) ws.note_rejected({label});
                        continue;
                    }
                    if (verdict.is_string() && normalize_label(verdict.get<std::string>()) == "keep")
                        ws.try_add(node, *it->second);
                }
            } catch (const Error& e) {
                if (e.code() != ErrorCode::UnparseableOutput && e.code() != ErrorCode::Truncated) throw;
                spdlog::warn("level membership under '{}' unusable, deferring all: {}", node.str(), e.what());
            }
        }

        // Routing into the subtrees of this level's nodes.
        const auto level_nodes = ws.graph.children(node);
        if (level_nodes.empty()) continue;
        std::unordered_map<std::string, NodeId> level_by_label;
        for (const NodeId& q : level_nodes) level_by_label.emplace(ws.graph.node(q).normalized_label(), q);
        const PromptTemplate& tmpl = templates.at(TaskKind::route);
        PromptRequest req;
        req.system_instruction = tmpl.system;
        req.max_output_tokens = options.max_output_tokens;
        req.payload = fill(tmpl.user, {{"parent", parent_label},
                                       {"level_nodes", label_list(ws.graph, level_nodes)},
                                       {"candidates", label_list(ws.graph, todo)}});
        try {
            const auto answers = complete_structured(provider, req, parse_label_dict, calls);
            for (const auto& [label, targets] : answers) {
                auto it = todo_by_label.find(normalize_label(label));
                if (it == todo_by_label.end()) continue;
                const NodeId& candidate = *it->second;
                std::vector<std::string> names;
                if (targets.is_string()) names.push_back(targets.get<std::string>());
                else if (targets.is_array())
                    for (const auto& t : targets)
                        if (t.is_string()) names.push_back(t.get<std::string>());
                for (const auto& name : names) {
                    auto q = level_by_label.find(normalize_label(name));
                    if (q == level_by_label.end()) {
                        if (!ws.labels.find(name)) ws.note_rejected({name});
                        continue;
                    }
                    if (q->second != candidate) route_to(q->second, candidate, d + 1);
                }
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::UnparseableOutput && e.code() != ErrorCode::Truncated) throw;
            spdlog::warn("routing under '{}' unusable: {}", node.str(), e.what());
        }
    }
    return ws.finish(Strategy::cyclical, calls, base_edges);
}

HierarchyDelta generate(Strategy strategy, const Hierarchy& kg, const CandidateSet& candidates,
                        CompletionProvider& provider, const GeneratorOptions& options) {
    return strategy == Strategy::one_shot ? generate_one_shot(kg, candidates, provider, options)
                                          : generate_cyclical(kg, candidates, provider, options);
}

// Review ---------------------------------------------------------------------

nlohmann::json to_json(const ReviewFinding& f, const Hierarchy& h) {
    auto label = [&](const NodeId& id) { return h.contains(id) ? h.node(id).label : id.str(); };
    nlohmann::json j = {{"kind", to_string(f.kind)},
                        {"node", f.node.str()},
                        {"node_label", label(f.node)},
                        {"current_parent", f.current_parent.str()},
                        {"suggested_parent", nullptr},
                        {"rationale", f.rationale}};
    if (f.suggested_parent) j["suggested_parent"] = f.suggested_parent->str();
    return j;
}

namespace {

struct ParsedReview {
    bool approved = false;
    std::vector<ReviewFinding> findings;
    std::vector<std::string> warnings;
};

ParsedReview parse_review(std::string_view raw, const Hierarchy& h) {
    auto dict = extract_dictionary(raw);
    if (!dict) throw Error(ErrorCode::UnparseableOutput, "no dictionary found in model output");
    if (!dict->contains("findings") || !(*dict)["findings"].is_array())
        throw Error(ErrorCode::UnparseableOutput, "review answer lacks a findings list");
    LabelIndex index;
    for (const Node& n : h.nodes()) index.add(n);

    ParsedReview out;
    out.approved = dict->value("verdict", std::string{}) == "approved";
    for (const auto& item : (*dict)["findings"]) {
        if (!item.is_object()) continue;
        const std::string node = item.value("node", std::string{});
        const std::string parent = item.value("current_parent", std::string{});
        const NodeId* n = index.find(node);
        const NodeId* p = index.find(parent);
        if (n == nullptr || p == nullptr) {
            out.warnings.push_back("finding on unknown node '" + node + "' / parent '" + parent + "' dropped");
            continue;
        }
        if (!h.has_edge(*p, *n)) {
            out.warnings.push_back("finding claims '" + parent + "' is the parent of '" + node + "'; it is not; dropped");
            continue;
        }
        ReviewFinding f;
        f.node = *n;
        f.current_parent = *p;
        f.kind = finding_kind_from_string(item.value("kind", std::string{})).value_or(FindingKind::wrong_parent);
        f.rationale = item.value("rationale", std::string{});
        if (item.contains("suggested_parent") && item["suggested_parent"].is_string()) {
            const std::string suggested = item["suggested_parent"].get<std::string>();
            const NodeId* s = index.find(suggested);
            if (s == nullptr) {
                out.warnings.push_back("finding on '" + node + "' suggests unknown parent '" + suggested + "'; dropped");
                continue;
            }
            f.suggested_parent = *s;
        }
        out.findings.push_back(std::move(f));
    }
    return out;
}

/// Drops findings whose move, applied on top of the previously kept ones,
/// would close a cycle.
void keep_acyclic_moves(const Hierarchy& h, std::vector<ReviewFinding>& findings, std::vector<std::string>& warnings) {
    Hierarchy trial = h;
    std::vector<ReviewFinding> kept;
    for (auto& f : findings) {
        if (!f.suggested_parent) {
            kept.push_back(std::move(f));
            continue;
        }
        const bool removed = trial.remove_edge(f.current_parent, f.node);
        try {
            trial.add_edge(*f.suggested_parent, f.node, EdgeProvenance::generated);
            kept.push_back(std::move(f));
        } catch (const Error& e) {
            if (removed) trial.insert_edge_unchecked(f.current_parent, f.node, EdgeProvenance::generated);
            std::string msg = "finding moving '" + h.node(f.node).label + "' under '" +
                              h.node(*f.suggested_parent).label + "' dropped: " + e.what();
            spdlog::warn("{}", msg);
            warnings.push_back(std::move(msg));
        }
    }
    findings = std::move(kept);
}

template <class Result>
Result run_review(TaskKind kind, const Hierarchy& h, CompletionProvider& provider, const GeneratorOptions& options) {
    const PromptTemplate& tmpl = templates_of(options).at(kind);
    PromptRequest req;
    req.system_instruction = tmpl.system;
    req.max_output_tokens = options.max_output_tokens;
    req.payload = fill(tmpl.user, {{"existing_hierarchy", nest_hierarchy(h).dump()}});
    Result out;
    auto parsed = complete_structured(
        provider, req, [&](std::string_view raw) { return parse_review(raw, h); }, out.calls);
    out.findings = std::move(parsed.findings);
    out.warnings = std::move(parsed.warnings);
    for (const auto& w : out.warnings) spdlog::warn("{}", w);
    keep_acyclic_moves(h, out.findings, out.warnings);
    if constexpr (std::is_same_v<Result, SubgraphVerdict>) out.approved = parsed.approved && out.findings.empty();
    return out;
}

} // namespace

ReviewOutcome review_pass(const Hierarchy& hierarchy, CompletionProvider& provider, const GeneratorOptions& options) {
    if (const auto v = hierarchy.validate(); !v.empty())
        throw Error(ErrorCode::PreconditionFailed, "hierarchy under review is invalid: " + v.front().message);
    return run_review<ReviewOutcome>(TaskKind::review, hierarchy, provider, options);
}

SubgraphVerdict evaluate_subgraph(const Hierarchy& subgraph, CompletionProvider& provider,
                                  const GeneratorOptions& options) {
    if (subgraph.roots().size() != 1)
        throw Error(ErrorCode::PreconditionFailed, "evaluation needs a subgraph with exactly one L1 root");
    if (subgraph.node_count() == 1) return SubgraphVerdict{true, {}, {}, 0};
    return run_review<SubgraphVerdict>(TaskKind::evaluate, subgraph, provider, options);
}

// Instrumentation ------------------------------------------------------------

EdgeScore score_edges(const std::vector<EdgePair>& predicted, const Hierarchy& gold, const std::set<NodeId>& candidates) {
    std::set<EdgePair> gold_edges;
    for (const Edge& e : gold.edges())
        if (candidates.contains(e.child)) gold_edges.emplace(e.parent, e.child);
    const std::set<EdgePair> pred(predicted.begin(), predicted.end());

    std::size_t hits = 0;
    for (const auto& e : pred) hits += gold_edges.contains(e) ? 1 : 0;

    EdgeScore score;
    score.precision = pred.empty() ? (gold_edges.empty() ? 1.0 : 0.0) : double(hits) / double(pred.size());
    score.recall = gold_edges.empty() ? 1.0 : double(hits) / double(gold_edges.size());
    score.f1 = (score.precision + score.recall) == 0.0
                   ? 0.0
                   : 2.0 * score.precision * score.recall / (score.precision + score.recall);

    const auto levels = gold.levels();
    std::map<int, DepthAccuracy> per;
    for (const auto& e : gold_edges) {
        auto it = levels.find(e.second);
        const int level = it == levels.end() ? 0 : it->second;
        auto& slot = per[level];
        slot.level = level;
        ++slot.gold_edges;
        if (pred.contains(e)) ++slot.recovered;
    }
    for (auto& [level, acc] : per) {
        acc.accuracy = acc.gold_edges == 0 ? 1.0 : double(acc.recovered) / double(acc.gold_edges);
        score.by_depth.push_back(acc);
    }
    return score;
}

} // namespace hiergen
