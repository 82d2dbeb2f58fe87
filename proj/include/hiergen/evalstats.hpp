// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#pragma once

#include "hiergen/kg.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hiergen {

/// Per-level counts where every level >= collapse_at shares the bucket
/// keyed by `collapse_at` (printed as "5+" for collapse_at = 5).
struct LevelHistogram {
    int collapse_at = 5;
    std::map<int, std::size_t> counts;

    std::size_t total() const;
    std::size_t at(int level) const;
    std::string bucket_label(int level) const;
    friend bool operator==(const LevelHistogram&, const LevelHistogram&) = default;
};

LevelHistogram collapse(const std::map<int, std::size_t>& by_level, int collapse_at);
nlohmann::json to_json(const LevelHistogram& h);

/// Nodes counted once, at their minimal level.
LevelHistogram level_histogram(const Hierarchy& graph, int collapse_at);

/// Parent placements: an L1 root counts once at level 1, every edge whose
/// endpoints are both in the hierarchy counts at level(parent) + 1. A
/// multi-parent node therefore counts once per parent.
LevelHistogram placement_histogram(const Hierarchy& graph, int collapse_at, std::string_view node_class = {});

struct CoverageReport {
    std::string node_class;
    std::size_t total_nodes = 0;
    std::size_t in_hierarchy_before = 0;
    std::size_t in_hierarchy_after = 0;
    std::map<int, std::size_t> per_level_counts;      // minimal level, sums to in_hierarchy_after
    std::map<int, std::size_t> placement_level_counts;  // see placement_histogram
    double coverage_fraction = 0.0;                   // after / total
    double coverage_increase = 0.0;                   // (after - before) / total
};

/// Both graphs must hold the same node population for `node_class`.
CoverageReport coverage_report(const Hierarchy& before, const Hierarchy& after, std::string_view node_class);
nlohmann::json to_json(const CoverageReport& r);
/// Human-readable table with the level columns collapsed at `collapse_at`.
std::string format_table(const CoverageReport& r, int collapse_at = 5);

// Review sampling ------------------------------------------------------------

enum class ReviewOutcomeKind { relevant, misplaced, unsure };

std::string_view to_string(ReviewOutcomeKind k) noexcept;
ReviewOutcomeKind review_outcome_from_string(std::string_view s);

struct ReviewSample {
    NodeId subtree_root;
    std::vector<NodeId> nodes;
    std::optional<std::string> assigned_reviewer;
    std::map<NodeId, ReviewOutcomeKind> outcomes;

    friend bool operator==(const ReviewSample&, const ReviewSample&) = default;
};

nlohmann::json to_json(const std::vector<ReviewSample>& samples);
std::vector<ReviewSample> review_samples_from_json(const nlohmann::json& j);

/// One sample per L1 category. Nodes are stratified by (category, level),
/// where a node belongs to the first root, in root order, that reaches it.
/// Each stratum contributes round(rate * size) nodes; a category that
/// would contribute nothing still contributes one.
std::vector<ReviewSample> sample_for_review(const Hierarchy& graph, double rate, std::uint64_t seed);

struct RelevanceCounts {
    std::size_t relevant = 0;
    std::size_t misplaced = 0;
    std::size_t unsure = 0;
    /// relevant / (relevant + misplaced); empty when that is 0.
    std::optional<double> relevant_fraction() const;
};

struct RelevanceSummary {
    RelevanceCounts overall;
    std::map<NodeId, RelevanceCounts> by_category;
    std::size_t unresolved() const { return overall.unsure; }
};

/// Throws NoOutcomes when no sample has a recorded outcome.
RelevanceSummary relevance_summary(const std::vector<ReviewSample>& samples);
nlohmann::json to_json(const RelevanceSummary& s);

} // namespace hiergen
