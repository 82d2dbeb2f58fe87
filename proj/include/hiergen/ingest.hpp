// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#pragma once

#include "hiergen/generator.hpp"
#include "hiergen/kg.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hiergen {

inline constexpr int kSnapshotFormatVersion = 1;
inline constexpr std::string_view kDefaultTimestamp = "1970-01-01T00:00:00Z";

// Corrections ----------------------------------------------------------------

struct Correction {
    NodeId node;
    std::set<NodeId> remove_parents;
    std::set<NodeId> add_parents;
    std::string reviewer;
    std::string timestamp;
};

struct CorrectionSet {
    std::vector<Correction> corrections;
};

nlohmann::json to_json(const CorrectionSet& cs);
CorrectionSet correction_set_from_json(const nlohmann::json& j);

struct CorrectionOutcome {
    std::size_t index = 0;
    NodeId node;
    bool applied = false;
    std::optional<ErrorCode> error;
    std::string message;
};

struct CorrectionReport {
    std::vector<CorrectionOutcome> outcomes;
    std::size_t applied() const;
    std::size_t failed() const { return outcomes.size() - applied(); }
};

nlohmann::json to_json(const CorrectionReport& r);

/// Each correction removes its listed parent edges, then adds its new
/// parents with human-corrected provenance, all or nothing. Failing
/// corrections are reported and the remaining ones still apply.
Hierarchy apply_corrections(const Hierarchy& graph, const CorrectionSet& corrections, CorrectionReport* report = nullptr);

// Deltas ---------------------------------------------------------------------

struct ApplyOptions {
    /// Called before each edge is inserted; a throwing hook aborts the
    /// application (fault injection in tests).
    std::function<void(std::size_t edge_index)> before_edge;
    /// Require every base edge of the delta to still be present.
    bool check_base = true;
};

/// All-or-nothing application of a generated delta. The input graph is
/// never modified; the returned graph carries the new edges as generated.
Hierarchy apply_delta(const Hierarchy& graph, const HierarchyDelta& delta, const ApplyOptions& options = {});

// Merge ----------------------------------------------------------------------

struct DroppedEdge {
    NodeId parent;  // ids after unification
    NodeId child;
    std::string reason;
};

struct MergeReport {
    std::vector<std::pair<NodeId, NodeId>> unified;  // (subgraph id, kg id)
    std::vector<std::pair<NodeId, NodeId>> renamed;  // (subgraph id, inserted id)
    std::size_t inserted_nodes = 0;
    std::size_t inserted_edges = 0;
    std::vector<NodeId> new_roots;
    std::vector<DroppedEdge> dropped_edges;
};

nlohmann::json to_json(const MergeReport& r);

/// Unifies nodes by (class, normalized label) with the KG payload winning
/// and attributes unioned; inserts the rest; rewires edges onto unified
/// ids and drops (and reports) any edge that would break the DAG or give
/// an L1 root a parent. Subgraph roots that matched nothing become L1 roots.
Hierarchy merge_subgraph(const Hierarchy& kg, const Hierarchy& domain_subgraph, MergeReport* report = nullptr);

// Snapshots and provenance ---------------------------------------------------

struct ProvenanceEntry {
    std::uint64_t seq = 0;
    std::string kind;  // "delta" | "corrections" | "merge" | "import"
    std::string timestamp;
    nlohmann::json payload;

    friend bool operator==(const ProvenanceEntry&, const ProvenanceEntry&) = default;
};

struct GraphSnapshot {
    Hierarchy hierarchy;
    std::vector<ProvenanceEntry> provenance_log;

    friend bool operator==(const GraphSnapshot&, const GraphSnapshot&) = default;
};

/// Canonical text: sorted-key JSON with nodes and edges sorted, followed
/// by a `checksum sha256:<hex>` line over the JSON text.
std::string save_snapshot(const GraphSnapshot& snapshot);
GraphSnapshot load_snapshot(std::string_view bytes);

GraphSnapshot read_snapshot_file(const std::filesystem::path& path);
/// Writes through a temporary file and a rename, so a crash never leaves a
/// half-written snapshot behind.
void write_snapshot_file(const std::filesystem::path& path, const GraphSnapshot& snapshot);

nlohmann::json to_json(const Hierarchy& h);
Hierarchy hierarchy_from_json(const nlohmann::json& j);

/// Applies and logs. The input is never modified; errors propagate. A
/// delta identical to one already in the log is StaleDelta.
GraphSnapshot commit_delta(const GraphSnapshot& s, const HierarchyDelta& delta, std::string timestamp,
                           const ApplyOptions& options = {});
GraphSnapshot commit_corrections(const GraphSnapshot& s, const CorrectionSet& corrections, std::string timestamp,
                                 CorrectionReport* report = nullptr);
GraphSnapshot commit_merge(const GraphSnapshot& s, const Hierarchy& domain_subgraph, std::string timestamp,
                           MergeReport* report = nullptr);
GraphSnapshot commit_import(const GraphSnapshot& s, const std::vector<Node>& nodes, std::string timestamp);

/// Re-applies the entries of `log` newer than the last entry of `base`.
GraphSnapshot replay(const GraphSnapshot& base, const std::vector<ProvenanceEntry>& log);

// Node import ----------------------------------------------------------------

/// CSV with a header row `id,label,class[,attr...]`; quoted fields follow
/// RFC 4180. Empty attribute cells are omitted.
std::vector<Node> read_nodes_csv(std::istream& in);

} // namespace hiergen
