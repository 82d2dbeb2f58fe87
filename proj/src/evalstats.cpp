// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "hiergen/evalstats.hpp"

#include "hiergen/error.hpp"
#include "hiergen/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <sstream>
#include <unordered_map>

namespace hiergen {

std::size_t LevelHistogram::total() const {
    std::size_t t = 0;
    for (const auto& [level, n] : counts) t += n;
    return t;
}

std::size_t LevelHistogram::at(int level) const {
    auto it = counts.find(std::min(level, collapse_at));
    return it == counts.end() ? 0 : it->second;
}

std::string LevelHistogram::bucket_label(int level) const {
    return level >= collapse_at ? std::to_string(collapse_at) + "+" : std::to_string(level);
}

LevelHistogram collapse(const std::map<int, std::size_t>& by_level, int collapse_at) {
    if (collapse_at < 2) throw Error(ErrorCode::PreconditionFailed, "collapse_at must be at least 2");
    LevelHistogram h;
    h.collapse_at = collapse_at;
    for (const auto& [level, n] : by_level) h.counts[std::min(level, collapse_at)] += n;
    return h;
}

nlohmann::json to_json(const LevelHistogram& h) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [level, n] : h.counts) j[h.bucket_label(level)] = n;
    return j;
}

namespace {

std::map<int, std::size_t> node_levels(const Hierarchy& g, std::string_view node_class) {
    std::map<int, std::size_t> out;
    for (const auto& [id, level] : g.levels())
        if (node_class.empty() || g.node(id).node_class == node_class) ++out[level];
    return out;
}

std::map<int, std::size_t> placement_levels(const Hierarchy& g, std::string_view node_class) {
    const auto levels = g.levels();
    std::map<int, std::size_t> out;
    auto of_class = [&](const NodeId& id) { return node_class.empty() || g.node(id).node_class == node_class; };
    for (const NodeId& r : g.roots())
        if (of_class(r)) ++out[1];
    for (const Edge& e : g.edges()) {
        if (!of_class(e.child) || !levels.contains(e.child)) continue;
        auto p = levels.find(e.parent);
        if (p != levels.end()) ++out[p->second + 1];
    }
    return out;
}

std::size_t class_population(const Hierarchy& g, std::string_view node_class) {
    return static_cast<std::size_t>(std::count_if(g.nodes().begin(), g.nodes().end(), [&](const Node& n) {
        return node_class.empty() || n.node_class == node_class;
    }));
}

} // namespace

LevelHistogram level_histogram(const Hierarchy& graph, int collapse_at) {
    return collapse(node_levels(graph, {}), collapse_at);
}

LevelHistogram placement_histogram(const Hierarchy& graph, int collapse_at, std::string_view node_class) {
    return collapse(placement_levels(graph, node_class), collapse_at);
}

CoverageReport coverage_report(const Hierarchy& before, const Hierarchy& after, std::string_view node_class) {
    auto population = [&](const Hierarchy& g) {
        std::vector<NodeId> ids;
        for (const Node& n : g.nodes())
            if (n.node_class == node_class) ids.push_back(n.id);
        std::sort(ids.begin(), ids.end());
        return ids;
    };
    if (population(before) != population(after))
        throw Error(ErrorCode::ClassMismatch,
                    "before/after graphs hold different '" + std::string(node_class) + "' node populations");

    CoverageReport r;
    r.node_class = std::string(node_class);
    r.total_nodes = class_population(after, node_class);
    r.per_level_counts = node_levels(after, node_class);
    r.placement_level_counts = placement_levels(after, node_class);
    for (const auto& [level, n] : node_levels(before, node_class)) r.in_hierarchy_before += n;
    for (const auto& [level, n] : r.per_level_counts) r.in_hierarchy_after += n;
    if (r.total_nodes > 0) {
        r.coverage_fraction = double(r.in_hierarchy_after) / double(r.total_nodes);
        r.coverage_increase =
            (double(r.in_hierarchy_after) - double(r.in_hierarchy_before)) / double(r.total_nodes);
    }
    return r;
}

nlohmann::json to_json(const CoverageReport& r) {
    auto levels = [](const std::map<int, std::size_t>& m) {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [level, n] : m) j[std::to_string(level)] = n;
        return j;
    };
    return {{"node_class", r.node_class},
            {"total_nodes", r.total_nodes},
            {"in_hierarchy_before", r.in_hierarchy_before},
            {"in_hierarchy_after", r.in_hierarchy_after},
            {"per_level_counts", levels(r.per_level_counts)},
            {"placement_level_counts", levels(r.placement_level_counts)},
            {"coverage_fraction", r.coverage_fraction},
            {"coverage_increase", r.coverage_increase}};
}

std::string format_table(const CoverageReport& r, int collapse_at) {
    const LevelHistogram nodes = collapse(r.per_level_counts, collapse_at);
    const LevelHistogram placements = collapse(r.placement_level_counts, collapse_at);
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-10s %8s %8s %8s %9s %9s\n", "class", "total", "before", "after", "coverage",
                  "increase");
    out << buf;
    std::snprintf(buf, sizeof buf, "%-10s %8zu %8zu %8zu %8.2f%% %8.2f%%\n", r.node_class.c_str(), r.total_nodes,
                  r.in_hierarchy_before, r.in_hierarchy_after, 100.0 * r.coverage_fraction,
                  100.0 * r.coverage_increase);
    out << buf;
    auto row = [&](const char* name, const LevelHistogram& h) {
        out << "  " << name;
        for (int level = 1; level <= collapse_at; ++level)
            out << "  L" << h.bucket_label(level) << "=" << h.at(level);
        out << "  (sum " << h.total() << ")\n";
    };
    row("nodes     ", nodes);
    row("placements", placements);
    return out.str();
}

// Review sampling ------------------------------------------------------------

std::string_view to_string(ReviewOutcomeKind k) noexcept {
    switch (k) {
    case ReviewOutcomeKind::relevant: return "relevant";
    case ReviewOutcomeKind::misplaced: return "misplaced";
    case ReviewOutcomeKind::unsure: return "unsure";
    }
    return "unsure";
}

ReviewOutcomeKind review_outcome_from_string(std::string_view s) {
    if (s == "relevant") return ReviewOutcomeKind::relevant;
    if (s == "misplaced") return ReviewOutcomeKind::misplaced;
    if (s == "unsure") return ReviewOutcomeKind::unsure;
    throw Error(ErrorCode::SchemaError, "unknown review outcome '" + std::string(s) + "'");
}

nlohmann::json to_json(const std::vector<ReviewSample>& samples) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : samples) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : s.nodes) nodes.push_back(n.str());
        nlohmann::json outcomes = nlohmann::json::object();
        for (const auto& [n, o] : s.outcomes) outcomes[n.str()] = to_string(o);
        arr.push_back({{"subtree_root", s.subtree_root.str()},
                       {"nodes", std::move(nodes)},
                       {"assigned_reviewer", s.assigned_reviewer ? nlohmann::json(*s.assigned_reviewer) : nullptr},
                       {"outcomes", std::move(outcomes)}});
    }
    return {{"format_version", 1}, {"samples", std::move(arr)}};
}

std::vector<ReviewSample> review_samples_from_json(const nlohmann::json& j) {
    try {
        std::vector<ReviewSample> out;
        for (const auto& item : j.at("samples")) {
            ReviewSample s;
            s.subtree_root = NodeId(item.at("subtree_root").get<std::string>());
            for (const auto& n : item.at("nodes")) s.nodes.emplace_back(n.get<std::string>());
            if (item.contains("assigned_reviewer") && item["assigned_reviewer"].is_string())
                s.assigned_reviewer = item["assigned_reviewer"].get<std::string>();
            const nlohmann::json outcomes = item.value("outcomes", nlohmann::json::object());
            for (const auto& [k, v] : outcomes.items()) {
                NodeId id(k);
                if (std::find(s.nodes.begin(), s.nodes.end(), id) == s.nodes.end())
                    throw Error(ErrorCode::SchemaError, "outcome for '" + k + "' which is not in the sample");
                s.outcomes.emplace(std::move(id), review_outcome_from_string(v.get<std::string>()));
            }
            out.push_back(std::move(s));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("review samples: ") + e.what());
    }
}

std::vector<ReviewSample> sample_for_review(const Hierarchy& graph, double rate, std::uint64_t seed) {
    if (!(rate > 0.0 && rate <= 1.0)) throw Error(ErrorCode::PreconditionFailed, "sampling rate must be in (0, 1]");

    // Primary category of each node: the first root (in root order) whose
    // breadth-first sweep reaches it, with the level seen there.
    std::unordered_map<NodeId, std::size_t> category;
    const auto levels = graph.levels();
    const auto roots = graph.roots();
    for (std::size_t r = 0; r < roots.size(); ++r) {
        std::deque<NodeId> queue{roots[r]};
        category.try_emplace(roots[r], r);
        while (!queue.empty()) {
            const NodeId n = queue.front();
            queue.pop_front();
            for (const NodeId& c : graph.children(n))
                if (category.try_emplace(c, r).second) queue.push_back(c);
        }
    }

    std::vector<std::map<int, std::vector<NodeId>>> strata(roots.size());
    for (const Node& n : graph.nodes()) {
        auto it = category.find(n.id);
        if (it != category.end()) strata[it->second][levels.at(n.id)].push_back(n.id);
    }

    std::vector<ReviewSample> out;
    for (std::size_t r = 0; r < roots.size(); ++r) {
        ReviewSample sample;
        sample.subtree_root = roots[r];
        std::vector<NodeId> leftovers;
        for (auto& [level, ids] : strata[r]) {
            std::sort(ids.begin(), ids.end());
            Rng rng(mix_seed(seed, fnv1a64(roots[r].str() + "#" + std::to_string(level))));
            rng.shuffle(ids);
            const auto k = static_cast<std::size_t>(std::floor(rate * double(ids.size()) + 0.5));
            sample.nodes.insert(sample.nodes.end(), ids.begin(), ids.begin() + std::min(k, ids.size()));
            if (k < ids.size()) leftovers.push_back(ids[k]);
        }
        if (sample.nodes.empty()) {
            // Prefer a node below the root; the root itself is the fallback.
            sample.nodes.push_back(leftovers.size() > 1 ? leftovers[1] : leftovers.empty() ? roots[r] : leftovers.front());
        }
        std::sort(sample.nodes.begin(), sample.nodes.end());
        out.push_back(std::move(sample));
    }
    return out;
}

std::optional<double> RelevanceCounts::relevant_fraction() const {
    if (relevant + misplaced == 0) return std::nullopt;
    return double(relevant) / double(relevant + misplaced);
}

RelevanceSummary relevance_summary(const std::vector<ReviewSample>& samples) {
    RelevanceSummary s;
    std::size_t recorded = 0;
    for (const auto& sample : samples) {
        auto& cat = s.by_category[sample.subtree_root];
        for (const auto& [node, outcome] : sample.outcomes) {
            ++recorded;
            for (RelevanceCounts* c : {&cat, &s.overall}) {
                switch (outcome) {
                case ReviewOutcomeKind::relevant: ++c->relevant; break;
                case ReviewOutcomeKind::misplaced: ++c->misplaced; break;
                case ReviewOutcomeKind::unsure: ++c->unsure; break;
                }
            }
        }
    }
    if (recorded == 0) throw Error(ErrorCode::NoOutcomes, "no review outcome has been recorded");
    return s;
}

nlohmann::json to_json(const RelevanceSummary& s) {
    auto counts = [](const RelevanceCounts& c) {
        const auto f = c.relevant_fraction();
        return nlohmann::json{{"relevant", c.relevant},
                              {"misplaced", c.misplaced},
                              {"unsure", c.unsure},
                              {"relevant_fraction", f ? nlohmann::json(*f) : nlohmann::json(nullptr)}};
    };
    nlohmann::json by = nlohmann::json::object();
    for (const auto& [id, c] : s.by_category) by[id.str()] = counts(c);
    nlohmann::json j = counts(s.overall);
    j["unresolved"] = s.unresolved();
    j["by_category"] = std::move(by);
    return j;
}

} // namespace hiergen
