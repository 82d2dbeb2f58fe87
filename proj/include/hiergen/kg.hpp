// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hiergen {

/// Opaque node identifier. Equality is exact byte equality; distinct from
/// the display label, so two classes may reuse a label string.
class NodeId {
public:
    NodeId() = default;
    explicit NodeId(std::string value) : value_(std::move(value)) {}

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    friend bool operator==(const NodeId&, const NodeId&) = default;
    friend auto operator<=>(const NodeId&, const NodeId&) = default;

private:
    std::string value_;
};

} // namespace hiergen

template <>
struct std::hash<hiergen::NodeId> {
    std::size_t operator()(const hiergen::NodeId& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};

namespace hiergen {

using Attributes = std::map<std::string, std::string>;

/// Lowercase, trimmed, internal whitespace collapsed to single spaces.
std::string normalize_label(std::string_view label);

struct Node {
    NodeId id;
    std::string label;
    std::string node_class;
    Attributes attributes;

    std::string normalized_label() const { return normalize_label(label); }

    friend bool operator==(const Node&, const Node&) = default;
};

enum class EdgeProvenance { preexisting, generated, human_corrected };

std::string_view to_string(EdgeProvenance p) noexcept;
EdgeProvenance edge_provenance_from_string(std::string_view s);

/// Parent/child edge; the relation is always "narrower-than-parent".
struct Edge {
    NodeId parent;
    NodeId child;
    EdgeProvenance provenance = EdgeProvenance::generated;

    friend bool operator==(const Edge&, const Edge&) = default;
};

inline constexpr std::string_view kNarrowerThanParent = "narrower-than-parent";

struct Violation {
    std::string invariant;  // "acyclic", "root-has-parent", "root-missing", "unregistered-class"
    std::vector<NodeId> nodes;
    std::string message;
};

/// Multi-parent DAG of typed nodes rooted at L1 categories.
///
/// Mutators keep every invariant (acyclic, roots parentless, endpoints
/// exist, classes registered) or throw `Error` leaving the graph untouched.
/// The `*_unchecked` entry points exist for loaders and for constructing
/// invalid graphs that `validate()` should report; they only check
/// endpoint existence.
///
/// All const members are free of hidden caches, so any number of readers
/// may share one instance as long as nobody mutates it.
class Hierarchy {
public:
    explicit Hierarchy(std::string class_filter = {}) : class_filter_(std::move(class_filter)) {}

    const std::string& class_filter() const noexcept { return class_filter_; }
    void set_class_filter(std::string c) { class_filter_ = std::move(c); }

    void register_class(const std::string& node_class) { classes_.insert(node_class); }
    const std::set<std::string>& classes() const noexcept { return classes_; }

    /// Returns false when an identical node already exists.
    bool add_node(Node node);
    /// Adds the attributes `id` does not have yet; existing keys win.
    /// Returns the number of keys added.
    std::size_t merge_attributes(const NodeId& id, const Attributes& extra);
    /// Returns false when the edge already exists (provenance is left as is).
    bool add_edge(const NodeId& parent, const NodeId& child,
                  EdgeProvenance provenance = EdgeProvenance::generated);
    void insert_edge_unchecked(const NodeId& parent, const NodeId& child,
                               EdgeProvenance provenance = EdgeProvenance::generated);
    bool remove_edge(const NodeId& parent, const NodeId& child);

    /// Marks an existing parentless node as an L1 root. Idempotent.
    void add_root(const NodeId& id);
    void insert_root_unchecked(const NodeId& id);

    bool contains(const NodeId& id) const { return index_.contains(id); }
    const Node& node(const NodeId& id) const;
    const Node* find(const NodeId& id) const;
    std::optional<NodeId> find_by_label(std::string_view node_class, std::string_view label) const;

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edge_count_; }

    /// Nodes in insertion order.
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    /// Edges grouped by parent in node insertion order, children in insertion order.
    std::vector<Edge> edges() const;
    std::span<const NodeId> roots() const noexcept { return roots_; }
    bool is_root(const NodeId& id) const;

    bool has_edge(const NodeId& parent, const NodeId& child) const;
    std::optional<EdgeProvenance> edge_provenance(const NodeId& parent, const NodeId& child) const;
    std::vector<NodeId> parents(const NodeId& id) const;
    std::vector<NodeId> children(const NodeId& id) const;

    /// 1 for roots, 1 + distance to the nearest root otherwise, nullopt when
    /// no root reaches the node.
    std::optional<int> level_of(const NodeId& id) const;
    /// Minimal level of every in-hierarchy node.
    std::unordered_map<NodeId, int> levels() const;
    bool in_hierarchy(const NodeId& id) const { return level_of(id).has_value(); }

    /// Every node reachable through child edges, excluding `id` itself.
    std::set<NodeId> descendants(const NodeId& id) const;
    /// True when `to` is reachable from `from` through zero or more child edges.
    bool reaches(const NodeId& from, const NodeId& to) const;

    /// Induced hierarchy over `root` and its descendants, `root` as sole L1.
    Hierarchy subgraph(const NodeId& root) const;

    std::vector<Violation> validate() const;

    friend bool operator==(const Hierarchy& a, const Hierarchy& b);

private:
    std::size_t index_of(const NodeId& id) const;
    bool reaches_index(std::size_t from, std::size_t to) const;
    static std::uint64_t edge_key(std::size_t p, std::size_t c) {
        return (static_cast<std::uint64_t>(p) << 32) | static_cast<std::uint64_t>(c);
    }
    static std::string label_key(std::string_view node_class, std::string_view normalized);

    std::string class_filter_;
    std::set<std::string> classes_;
    std::vector<Node> nodes_;
    std::unordered_map<NodeId, std::size_t> index_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_label_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<std::vector<std::size_t>> parents_;
    std::unordered_map<std::uint64_t, EdgeProvenance> edge_prov_;
    std::size_t edge_count_ = 0;
    std::vector<NodeId> roots_;
    std::vector<bool> root_flag_;
};

} // namespace hiergen
