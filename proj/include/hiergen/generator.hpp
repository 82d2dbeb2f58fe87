// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#pragma once

#include "hiergen/kg.hpp"
#include "hiergen/prompts.hpp"
#include "hiergen/provider.hpp"

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace hiergen {

/// Nodes the classifier assigned to one L1 category. They must not already
/// be part of that category's subgraph.
struct CandidateSet {
    NodeId l1_category;
    std::vector<NodeId> candidates;
};

enum class Strategy { one_shot, cyclical };

std::string_view to_string(Strategy s) noexcept;
Strategy strategy_from_string(std::string_view s);

using EdgePair = std::pair<NodeId, NodeId>;  // (parent, child)

/// Proposed edge additions for one category. Every candidate is either the
/// child of at least one entry in `edges_added` or listed in `unplaced`.
struct HierarchyDelta {
    NodeId l1_category;
    /// Edges of the category subgraph the delta was generated against, and
    /// their SHA-256 fingerprint. Other deltas may add to that subgraph; the
    /// delta only goes stale when one of these edges disappears.
    std::vector<EdgePair> base_edges;
    std::string base_fingerprint;
    std::vector<EdgePair> edges_added;
    std::set<NodeId> unplaced;
    std::vector<std::string> rejected_labels;  // hallucinated labels from the model
    Strategy strategy_used = Strategy::one_shot;
    int passes = 0;  // provider calls, repairs included
};

nlohmann::json to_json(const HierarchyDelta& delta);
HierarchyDelta delta_from_json(const nlohmann::json& j);

/// Sorted edges of the subgraph under `l1`.
std::vector<EdgePair> subgraph_edges(const Hierarchy& kg, const NodeId& l1);
/// Hex SHA-256 over `l1` and a sorted edge list.
std::string edges_fingerprint(const NodeId& l1, const std::vector<EdgePair>& sorted_edges);

struct StrategyChoice {
    Strategy strategy = Strategy::one_shot;
    std::string reason;
    std::size_t estimated_tokens = 0;
};

inline constexpr std::size_t kDefaultGenerateBatch = 50;

struct GeneratorOptions {
    std::size_t batch_size = kDefaultGenerateBatch;
    int max_depth = 6;
    bool longest_label_first = true;   // one-shot batch ordering
    std::size_t example_edges = 5;     // existing placements shown as examples
    int max_output_tokens = 4096;
    const TemplateSet* templates = nullptr;  // builtin when null
};

/// One-shot when the single full prompt (existing subtree, every candidate,
/// instructions) fits the budget with the safety margin; cyclical otherwise.
StrategyChoice select_strategy(const Hierarchy& kg, const CandidateSet& candidates, std::size_t context_budget,
                               const GeneratorOptions& options = {});

/// All candidates against the full existing subtree. More than one batch
/// means batches against the progressively updated subtree, then exactly
/// one correction pass that may only move or detach candidates.
HierarchyDelta generate_one_shot(const Hierarchy& kg, const CandidateSet& candidates, CompletionProvider& provider,
                                 const GeneratorOptions& options = {});

/// Level by level from the L1 root: keep/defer membership under each
/// node, then routing of the remaining candidates into the level's
/// subtrees, recursing until `options.max_depth` or exhaustion.
HierarchyDelta generate_cyclical(const Hierarchy& kg, const CandidateSet& candidates, CompletionProvider& provider,
                                 const GeneratorOptions& options = {});

HierarchyDelta generate(Strategy strategy, const Hierarchy& kg, const CandidateSet& candidates,
                        CompletionProvider& provider, const GeneratorOptions& options = {});

enum class FindingKind { wrong_parent, sibling_confusion, level_misplacement };

std::string_view to_string(FindingKind k) noexcept;
std::optional<FindingKind> finding_kind_from_string(std::string_view s) noexcept;

struct ReviewFinding {
    FindingKind kind = FindingKind::wrong_parent;
    NodeId node;
    NodeId current_parent;
    std::optional<NodeId> suggested_parent;
    std::string rationale;
};

struct ReviewOutcome {
    std::vector<ReviewFinding> findings;
    std::vector<std::string> warnings;  // dropped findings and why
    int calls = 0;
};

/// Asks the model for flaws in `hierarchy`. Findings that name unknown
/// nodes, a non-parent, or whose combined moves would close a cycle are
/// dropped with a warning.
ReviewOutcome review_pass(const Hierarchy& hierarchy, CompletionProvider& provider,
                          const GeneratorOptions& options = {});

struct SubgraphVerdict {
    bool approved = false;
    std::vector<ReviewFinding> findings;
    std::vector<std::string> warnings;
    int calls = 0;
};

/// Single-L1 subgraph evaluation. A lone root is approved without a call.
SubgraphVerdict evaluate_subgraph(const Hierarchy& subgraph, CompletionProvider& provider,
                                  const GeneratorOptions& options = {});

nlohmann::json to_json(const ReviewFinding& finding, const Hierarchy& h);

// Instrumentation ------------------------------------------------------------

struct DepthAccuracy {
    int level = 0;           // gold minimal level of the child
    std::size_t gold_edges = 0;
    std::size_t recovered = 0;
    double accuracy = 1.0;   // recovered / gold_edges
};

struct EdgeScore {
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 1.0;
    std::vector<DepthAccuracy> by_depth;
};

/// Compares predicted edges with the gold edges whose child is in
/// `candidates`.
EdgeScore score_edges(const std::vector<EdgePair>& predicted, const Hierarchy& gold,
                      const std::set<NodeId>& candidates);

} // namespace hiergen
