// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#pragma once

#include "hiergen/classifier.hpp"
#include "hiergen/generator.hpp"
#include "hiergen/kg.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

// Deterministic graphs used by the tests, the acceptance suite, the
// experiment harness and `hiergen fixture`.
namespace hiergen::fixtures {

struct GoldOptions {
    std::size_t nodes = 100;  // total, roots included
    int depth = 4;            // deepest level; always reached
    std::size_t roots = 1;
    double multi_parent_rate = 0.1;  // chance a node gets a second, same-level parent
    std::uint64_t seed = 1;
    std::string node_class = "intent";
};

/// Random gold taxonomy with unique labels. Second parents always sit on
/// the level of the first one, so stripping deeper levels never leaves a
/// kept node with a dropped parent.
Hierarchy make_gold_taxonomy(const GoldOptions& options);

/// Same nodes as `gold`, keeping only the edges between nodes at levels
/// <= keep_level (1 keeps just the roots).
Hierarchy strip_to_level(const Hierarchy& gold, int keep_level);

/// Per root: the gold subtree nodes that are not yet in the existing
/// subtree of that root. Roots with nothing to place are omitted.
std::vector<CandidateSet> candidate_sets(const Hierarchy& gold, const Hierarchy& existing);

struct CoverageFixture {
    Hierarchy before;
    Hierarchy after;
    std::string node_class;
};

/// 12385 intents, 25 roots; parent placements per level 25/904/4684/4961
/// and 3195 at level 5 or deeper; 956 in the hierarchy before, 12339
/// after. "love" and "marriage" are siblings, with "mom dad" and
/// "romantic message" under "love".
CoverageFixture make_intents_table1();

/// 328 colors, 12 roots; only the roots are in the hierarchy before.
CoverageFixture make_colors_table1();

struct ClassificationFixture {
    std::shared_ptr<const Hierarchy> gold;
    CategorySet categories;
    std::vector<Node> nodes;  // 50 nodes to classify
    std::vector<FewShotExample> examples;
    GoldLabels gold_labels;
};

/// Five categories; 40 single-category nodes, 5 two-category nodes and
/// 5 nodes that belong to no category.
ClassificationFixture make_classification_fixture();

/// Small gold taxonomy full of label-prefix pairs ("birthday" /
/// "birthday party") where the longer label is the child.
Hierarchy make_prefix_pair_fixture();

struct MisplacementFixture {
    std::shared_ptr<const Hierarchy> gold;  // "mom dad" under "marriage"
    Hierarchy generated;                    // "mom dad" under "love"
};

MisplacementFixture make_love_marriage_fixture();

} // namespace hiergen::fixtures
