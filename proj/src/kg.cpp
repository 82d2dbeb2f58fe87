// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "hiergen/kg.hpp"

#include "hiergen/error.hpp"

#include <algorithm>
#include <cctype>
#include <deque>

namespace hiergen {

std::string normalize_label(std::string_view label) {
    std::string out;
    out.reserve(label.size());
    bool pending_space = false;
    for (unsigned char ch : label) {
        if (std::isspace(ch)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(ch)));
    }
    return out;
}

std::string_view to_string(EdgeProvenance p) noexcept {
    switch (p) {
    case EdgeProvenance::preexisting: return "preexisting";
    case EdgeProvenance::generated: return "generated";
    case EdgeProvenance::human_corrected: return "human-corrected";
    }
    return "generated";
}

EdgeProvenance edge_provenance_from_string(std::string_view s) {
    if (s == "preexisting") return EdgeProvenance::preexisting;
    if (s == "generated") return EdgeProvenance::generated;
    if (s == "human-corrected") return EdgeProvenance::human_corrected;
    throw Error(ErrorCode::SchemaError, "unknown edge provenance '" + std::string(s) + "'");
}

std::string Hierarchy::label_key(std::string_view node_class, std::string_view normalized) {
    std::string key(node_class);
    key.push_back('\x1f');
    key.append(normalized);
    return key;
}

std::size_t Hierarchy::index_of(const NodeId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error(ErrorCode::UnknownNode, "'" + id.str() + "'");
    return it->second;
}

const Node& Hierarchy::node(const NodeId& id) const { return nodes_[index_of(id)]; }

std::size_t Hierarchy::merge_attributes(const NodeId& id, const Attributes& extra) {
    Attributes& attrs = nodes_[index_of(id)].attributes;
    std::size_t added = 0;
    for (const auto& [k, v] : extra) added += attrs.emplace(k, v).second ? 1 : 0;
    return added;
}

const Node* Hierarchy::find(const NodeId& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &nodes_[it->second];
}

std::optional<NodeId> Hierarchy::find_by_label(std::string_view node_class, std::string_view label) const {
    auto it = by_label_.find(label_key(node_class, normalize_label(label)));
    if (it == by_label_.end() || it->second.empty()) return std::nullopt;
    return nodes_[it->second.front()].id;
}

bool Hierarchy::add_node(Node node) {
    if (node.id.empty()) throw Error(ErrorCode::PreconditionFailed, "node id must be non-empty");
    if (node.label.empty())
        throw Error(ErrorCode::PreconditionFailed, "node '" + node.id.str() + "' has an empty label");
    if (!classes_.contains(node.node_class))
        throw Error(ErrorCode::UnknownClass,
                    "class '" + node.node_class + "' of node '" + node.id.str() + "' is not registered");
    if (auto it = index_.find(node.id); it != index_.end()) {
        if (nodes_[it->second] == node) return false;
        throw Error(ErrorCode::DuplicateIdConflict, "'" + node.id.str() + "' exists with a different payload");
    }
    const std::size_t idx = nodes_.size();
    index_.emplace(node.id, idx);
    by_label_[label_key(node.node_class, node.normalized_label())].push_back(idx);
    nodes_.push_back(std::move(node));
    children_.emplace_back();
    parents_.emplace_back();
    root_flag_.push_back(false);
    return true;
}

bool Hierarchy::reaches_index(std::size_t from, std::size_t to) const {
    if (from == to) return true;
    std::vector<bool> seen(nodes_.size(), false);
    std::vector<std::size_t> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
        const std::size_t cur = stack.back();
        stack.pop_back();
        for (std::size_t c : children_[cur]) {
            if (c == to) return true;
            if (!seen[c]) {
                seen[c] = true;
                stack.push_back(c);
            }
        }
    }
    return false;
}

bool Hierarchy::reaches(const NodeId& from, const NodeId& to) const {
    return reaches_index(index_of(from), index_of(to));
}

bool Hierarchy::add_edge(const NodeId& parent, const NodeId& child, EdgeProvenance provenance) {
    const std::size_t p = index_of(parent);
    const std::size_t c = index_of(child);
    if (p == c) throw Error(ErrorCode::InvalidEdge, "self-loop on '" + parent.str() + "'");
    if (edge_prov_.contains(edge_key(p, c))) return false;
    if (root_flag_[c])
        throw Error(ErrorCode::InvalidEdge, "L1 root '" + child.str() + "' cannot receive a parent");
    if (reaches_index(c, p))
        throw Error(ErrorCode::CycleRejected, "'" + parent.str() + "' -> '" + child.str() + "' closes a cycle");
    children_[p].push_back(c);
    parents_[c].push_back(p);
    edge_prov_.emplace(edge_key(p, c), provenance);
    ++edge_count_;
    return true;
}

void Hierarchy::insert_edge_unchecked(const NodeId& parent, const NodeId& child, EdgeProvenance provenance) {
    const std::size_t p = index_of(parent);
    const std::size_t c = index_of(child);
    if (p == c) throw Error(ErrorCode::InvalidEdge, "self-loop on '" + parent.str() + "'");
    if (!edge_prov_.emplace(edge_key(p, c), provenance).second) return;
    children_[p].push_back(c);
    parents_[c].push_back(p);
    ++edge_count_;
}

bool Hierarchy::remove_edge(const NodeId& parent, const NodeId& child) {
    const std::size_t p = index_of(parent);
    const std::size_t c = index_of(child);
    if (edge_prov_.erase(edge_key(p, c)) == 0) return false;
    std::erase(children_[p], c);
    std::erase(parents_[c], p);
    --edge_count_;
    return true;
}

void Hierarchy::add_root(const NodeId& id) {
    const std::size_t idx = index_of(id);
    if (root_flag_[idx]) return;
    if (!parents_[idx].empty())
        throw Error(ErrorCode::InvalidEdge, "'" + id.str() + "' has parents and cannot be an L1 root");
    root_flag_[idx] = true;
    roots_.push_back(id);
}

void Hierarchy::insert_root_unchecked(const NodeId& id) {
    const std::size_t idx = index_of(id);
    if (root_flag_[idx]) return;
    root_flag_[idx] = true;
    roots_.push_back(id);
}

bool Hierarchy::is_root(const NodeId& id) const {
    auto it = index_.find(id);
    return it != index_.end() && root_flag_[it->second];
}

std::vector<Edge> Hierarchy::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (std::size_t p = 0; p < nodes_.size(); ++p)
        for (std::size_t c : children_[p])
            out.push_back(Edge{nodes_[p].id, nodes_[c].id, edge_prov_.at(edge_key(p, c))});
    return out;
}

bool Hierarchy::has_edge(const NodeId& parent, const NodeId& child) const {
    auto pi = index_.find(parent);
    auto ci = index_.find(child);
    return pi != index_.end() && ci != index_.end() && edge_prov_.contains(edge_key(pi->second, ci->second));
}

std::optional<EdgeProvenance> Hierarchy::edge_provenance(const NodeId& parent, const NodeId& child) const {
    auto pi = index_.find(parent);
    auto ci = index_.find(child);
    if (pi == index_.end() || ci == index_.end()) return std::nullopt;
    auto it = edge_prov_.find(edge_key(pi->second, ci->second));
    if (it == edge_prov_.end()) return std::nullopt;
    return it->second;
}

std::vector<NodeId> Hierarchy::parents(const NodeId& id) const {
    std::vector<NodeId> out;
    for (std::size_t p : parents_[index_of(id)]) out.push_back(nodes_[p].id);
    return out;
}

std::vector<NodeId> Hierarchy::children(const NodeId& id) const {
    std::vector<NodeId> out;
    for (std::size_t c : children_[index_of(id)]) out.push_back(nodes_[c].id);
    return out;
}

std::optional<int> Hierarchy::level_of(const NodeId& id) const {
    const std::size_t start = index_of(id);
    // Walk upward; the first root met in BFS order is the nearest one.
    std::vector<int> dist(nodes_.size(), -1);
    std::deque<std::size_t> queue{start};
    dist[start] = 0;
    while (!queue.empty()) {
        const std::size_t cur = queue.front();
        queue.pop_front();
        if (root_flag_[cur]) return dist[cur] + 1;
        for (std::size_t p : parents_[cur]) {
            if (dist[p] < 0) {
                dist[p] = dist[cur] + 1;
                queue.push_back(p);
            }
        }
    }
    return std::nullopt;
}

std::unordered_map<NodeId, int> Hierarchy::levels() const {
    std::vector<int> level(nodes_.size(), 0);
    std::deque<std::size_t> queue;
    for (const NodeId& r : roots_) {
        const std::size_t idx = index_.at(r);
        level[idx] = 1;
        queue.push_back(idx);
    }
    while (!queue.empty()) {
        const std::size_t cur = queue.front();
        queue.pop_front();
        for (std::size_t c : children_[cur]) {
            if (level[c] == 0) {
                level[c] = level[cur] + 1;
                queue.push_back(c);
            }
        }
    }
    std::unordered_map<NodeId, int> out;
    out.reserve(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (level[i] > 0) out.emplace(nodes_[i].id, level[i]);
    return out;
}

std::set<NodeId> Hierarchy::descendants(const NodeId& id) const {
    const std::size_t start = index_of(id);
    std::vector<bool> seen(nodes_.size(), false);
    std::vector<std::size_t> stack{start};
    seen[start] = true;
    std::set<NodeId> out;
    while (!stack.empty()) {
        const std::size_t cur = stack.back();
        stack.pop_back();
        for (std::size_t c : children_[cur]) {
            if (seen[c]) continue;
            seen[c] = true;
            out.insert(nodes_[c].id);
            stack.push_back(c);
        }
    }
    return out;
}

Hierarchy Hierarchy::subgraph(const NodeId& root) const {
    const std::size_t r = index_of(root);
    std::vector<bool> member(nodes_.size(), false);
    std::vector<std::size_t> stack{r};
    member[r] = true;
    while (!stack.empty()) {
        const std::size_t cur = stack.back();
        stack.pop_back();
        for (std::size_t c : children_[cur]) {
            if (!member[c]) {
                member[c] = true;
                stack.push_back(c);
            }
        }
    }
    Hierarchy out(class_filter_);
    out.classes_ = classes_;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (member[i]) out.add_node(nodes_[i]);
    for (std::size_t p = 0; p < nodes_.size(); ++p) {
        if (!member[p]) continue;
        for (std::size_t c : children_[p])
            out.insert_edge_unchecked(nodes_[p].id, nodes_[c].id, edge_prov_.at(edge_key(p, c)));
    }
    out.insert_root_unchecked(root);
    return out;
}

std::vector<Violation> Hierarchy::validate() const {
    std::vector<Violation> out;

    for (const NodeId& r : roots_) {
        auto it = index_.find(r);
        if (it == index_.end()) {
            out.push_back({"root-missing", {r}, "L1 root '" + r.str() + "' is not a node"});
            continue;
        }
        if (!parents_[it->second].empty()) {
            Violation v{"root-has-parent", {r}, "L1 root '" + r.str() + "' has incoming edges from"};
            for (std::size_t p : parents_[it->second]) {
                v.nodes.push_back(nodes_[p].id);
                v.message += " '" + nodes_[p].id.str() + "'";
            }
            out.push_back(std::move(v));
        }
    }

    for (const Node& n : nodes_)
        if (!classes_.contains(n.node_class))
            out.push_back({"unregistered-class", {n.id}, "class '" + n.node_class + "' is not registered"});

    // Tarjan SCC, iterative. Every component with more than one node is a cycle.
    const std::size_t n = nodes_.size();
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, kUnset), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> scc_stack;
    std::size_t counter = 0;
    struct Frame {
        std::size_t node;
        std::size_t next_child;
    };
    for (std::size_t s = 0; s < n; ++s) {
        if (index[s] != kUnset) continue;
        std::vector<Frame> call{{s, 0}};
        index[s] = low[s] = counter++;
        scc_stack.push_back(s);
        on_stack[s] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.next_child < children_[f.node].size()) {
                const std::size_t c = children_[f.node][f.next_child++];
                if (index[c] == kUnset) {
                    index[c] = low[c] = counter++;
                    scc_stack.push_back(c);
                    on_stack[c] = true;
                    call.push_back({c, 0});
                } else if (on_stack[c]) {
                    low[f.node] = std::min(low[f.node], index[c]);
                }
                continue;
            }
            const std::size_t v = f.node;
            call.pop_back();
            if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
            if (low[v] != index[v]) continue;
            std::vector<NodeId> component;
            std::size_t w;
            do {
                w = scc_stack.back();
                scc_stack.pop_back();
                on_stack[w] = false;
                component.push_back(nodes_[w].id);
            } while (w != v);
            if (component.size() > 1) {
                std::sort(component.begin(), component.end());
                Violation viol{"acyclic", component, "cycle through"};
                for (const NodeId& id : component) viol.message += " '" + id.str() + "'";
                out.push_back(std::move(viol));
            }
        }
    }
    return out;
}

bool operator==(const Hierarchy& a, const Hierarchy& b) {
    if (a.class_filter_ != b.class_filter_ || a.classes_ != b.classes_) return false;
    if (a.roots_ != b.roots_) return false;
    if (a.nodes_.size() != b.nodes_.size() || a.edge_count_ != b.edge_count_) return false;
    for (const Node& n : a.nodes_) {
        const Node* other = b.find(n.id);
        if (other == nullptr || !(*other == n)) return false;
    }
    for (const Edge& e : a.edges())
        if (b.edge_provenance(e.parent, e.child) != e.provenance) return false;
    return true;
}

} // namespace hiergen
