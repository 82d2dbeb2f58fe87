// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "doctest.h"

#include "hiergen/error.hpp"
#include "hiergen/evalstats.hpp"
#include "hiergen/fixtures.hpp"

#include <cmath>
#include <deque>

using namespace hiergen;

namespace {

Hierarchy chain(int length) {
    Hierarchy h("intent");
    h.register_class("intent");
    for (int i = 0; i < length; ++i) {
        const std::string id = "c" + std::to_string(i);
        h.add_node({NodeId(id), "step " + std::to_string(i), "intent", {}});
        if (i == 0) h.add_root(NodeId(id));
        else h.add_edge(NodeId("c" + std::to_string(i - 1)), NodeId(id));
    }
    return h;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::SchemaError;
}

} // namespace

TEST_CASE("histograms of small graphs") {
    const auto one = level_histogram(chain(1), 5);
    CHECK(one.counts == std::map<int, std::size_t>{{1, 1}});

    const auto seven = level_histogram(chain(7), 5);
    CHECK(seven.counts == std::map<int, std::size_t>{{1, 1}, {2, 1}, {3, 1}, {4, 1}, {5, 3}});
    CHECK(seven.bucket_label(5) == "5+");
    CHECK(seven.bucket_label(3) == "3");
    CHECK(seven.total() == 7);
    CHECK(placement_histogram(chain(7), 5) == seven);
}

TEST_CASE("placements count every parent, nodes count once") {
    Hierarchy h = chain(3);
    h.add_node({NodeId("d"), "diamond", "intent", {}});
    h.add_edge(NodeId("c0"), NodeId("d"));
    h.add_edge(NodeId("c2"), NodeId("d"));
    const auto nodes = level_histogram(h, 5);
    const auto placements = placement_histogram(h, 5);
    CHECK(nodes.counts == std::map<int, std::size_t>{{1, 1}, {2, 2}, {3, 1}});
    CHECK(placements.counts == std::map<int, std::size_t>{{1, 1}, {2, 2}, {3, 1}, {4, 1}});
}

TEST_CASE("intents coverage reproduces the published row") {
    const auto fx = fixtures::make_intents_table1();
    const auto r = coverage_report(fx.before, fx.after, fx.node_class);
    CHECK(r.total_nodes == 12385);
    CHECK(r.in_hierarchy_before == 956);
    CHECK(r.in_hierarchy_after == 12339);
    CHECK(r.coverage_fraction == doctest::Approx(0.9963).epsilon(0.0001));
    const auto placements = collapse(r.placement_level_counts, 5);
    CHECK(placements.counts == std::map<int, std::size_t>{{1, 25}, {2, 904}, {3, 4684}, {4, 4961}, {5, 3195}});

    std::size_t sum = 0;
    for (const auto& [level, n] : r.per_level_counts) sum += n;
    CHECK(sum == r.in_hierarchy_after);

    const std::string table = format_table(r);
    for (const char* cell : {"12385", "956", "12339", "99.63%", "904", "4684", "4961", "3195"})
        CHECK(table.find(cell) != std::string::npos);
}

TEST_CASE("love and marriage sit side by side in the intents fixture") {
    const auto fx = fixtures::make_intents_table1();
    const auto& g = fx.after;
    const NodeId love = *g.find_by_label("intent", "love");
    const NodeId marriage = *g.find_by_label("intent", "marriage");
    CHECK(g.parents(love) == g.parents(marriage));
    CHECK(g.has_edge(love, *g.find_by_label("intent", "mom dad")));
    CHECK(g.has_edge(love, *g.find_by_label("intent", "romantic message")));
}

TEST_CASE("colors coverage totals") {
    const auto fx = fixtures::make_colors_table1();
    const auto r = coverage_report(fx.before, fx.after, fx.node_class);
    CHECK(r.total_nodes == 328);
    CHECK(r.in_hierarchy_before == 12);
    CHECK(r.in_hierarchy_after == 328);
    CHECK(r.coverage_fraction == 1.0);
}

TEST_CASE("degenerate and mismatched coverage") {
    Hierarchy empty("intent");
    empty.register_class("intent");
    const auto r = coverage_report(empty, empty, "intent");
    CHECK(r.total_nodes == 0);
    CHECK(r.in_hierarchy_after == 0);
    CHECK(r.coverage_fraction == 0.0);
    CHECK(r.coverage_increase == 0.0);

    CHECK(code_of([&] { coverage_report(empty, chain(3), "intent"); }) == ErrorCode::ClassMismatch);
}

TEST_CASE("review sampling") {
    const Hierarchy g = fixtures::make_gold_taxonomy({1000, 5, 4, 0.1, 17, "intent"});

    SUBCASE("rate 1 samples everything") {
        const auto samples = sample_for_review(g, 1.0, 3);
        std::size_t total = 0;
        for (const auto& s : samples) total += s.nodes.size();
        CHECK(total == g.node_count());
    }
    SUBCASE("same seed, same samples") {
        CHECK(sample_for_review(g, 0.1, 3) == sample_for_review(g, 0.1, 3));
    }
    SUBCASE("strata get their share within one node") {
        // reference strata: first root that reaches a node, minimal level
        std::map<NodeId, NodeId> owner;
        for (const NodeId& r : g.roots()) {
            std::deque<NodeId> q{r};
            owner.try_emplace(r, r);
            while (!q.empty()) {
                const NodeId n = q.front();
                q.pop_front();
                for (const NodeId& c : g.children(n))
                    if (owner.try_emplace(c, r).second) q.push_back(c);
            }
        }
        std::map<std::pair<NodeId, int>, std::size_t> size, taken;
        for (const auto& [n, r] : owner) ++size[{r, *g.level_of(n)}];
        const auto samples = sample_for_review(g, 0.1, 5);
        REQUIRE(samples.size() == g.roots().size());
        for (const auto& s : samples)
            for (const NodeId& n : s.nodes) {
                CHECK(owner.at(n) == s.subtree_root);
                ++taken[{s.subtree_root, *g.level_of(n)}];
            }
        for (const auto& [key, n] : size) {
            const double expected = 0.1 * double(n);
            CHECK(std::abs(double(taken[key]) - expected) <= 1.0);
        }
    }
    SUBCASE("every category gets at least one node") {
        for (const auto& s : sample_for_review(g, 0.0001, 1)) CHECK(s.nodes.size() >= 1);
    }
    SUBCASE("bad rate") {
        CHECK(code_of([&] { sample_for_review(g, 0.0, 1); }) == ErrorCode::PreconditionFailed);
    }
    SUBCASE("JSON round-trip") {
        auto samples = sample_for_review(g, 0.05, 2);
        samples[0].assigned_reviewer = "ana";
        samples[0].outcomes[samples[0].nodes[0]] = ReviewOutcomeKind::misplaced;
        CHECK(review_samples_from_json(to_json(samples)) == samples);
    }
}

TEST_CASE("relevance summary") {
    SUBCASE("19 relevant and 1 misplaced") {
        ReviewSample s;
        s.subtree_root = NodeId("r");
        for (int i = 0; i < 20; ++i) {
            const NodeId n("n" + std::to_string(i));
            s.nodes.push_back(n);
            s.outcomes[n] = i == 0 ? ReviewOutcomeKind::misplaced : ReviewOutcomeKind::relevant;
        }
        const auto sum = relevance_summary({s});
        CHECK(*sum.overall.relevant_fraction() == doctest::Approx(0.95));
    }
    SUBCASE("all unsure") {
        ReviewSample s;
        s.subtree_root = NodeId("r");
        for (int i = 0; i < 4; ++i) s.outcomes[NodeId("n" + std::to_string(i))] = ReviewOutcomeKind::unsure;
        const auto sum = relevance_summary({s});
        CHECK_FALSE(sum.overall.relevant_fraction().has_value());
        CHECK(sum.unresolved() == 4);
    }
    SUBCASE("nothing recorded") {
        ReviewSample s;
        s.subtree_root = NodeId("r");
        CHECK(code_of([&] { relevance_summary({s}); }) == ErrorCode::NoOutcomes);
    }
    SUBCASE("96 percent over two categories adds up") {
        std::vector<ReviewSample> samples(2);
        const std::size_t relevant[2] = {50, 46}, misplaced[2] = {1, 3};
        for (int c = 0; c < 2; ++c) {
            samples[c].subtree_root = NodeId("root" + std::to_string(c));
            int k = 0;
            for (std::size_t i = 0; i < relevant[c]; ++i)
                samples[c].outcomes[NodeId("c" + std::to_string(c) + "-" + std::to_string(k++))] =
                    ReviewOutcomeKind::relevant;
            for (std::size_t i = 0; i < misplaced[c]; ++i)
                samples[c].outcomes[NodeId("c" + std::to_string(c) + "-" + std::to_string(k++))] =
                    ReviewOutcomeKind::misplaced;
        }
        const auto sum = relevance_summary(samples);
        CHECK(*sum.overall.relevant_fraction() == doctest::Approx(0.96));
        std::size_t r = 0, m = 0;
        for (const auto& [root, counts] : sum.by_category) {
            r += counts.relevant;
            m += counts.misplaced;
        }
        CHECK(r == sum.overall.relevant);
        CHECK(m == sum.overall.misplaced);
        CHECK(sum.by_category.size() == 2);
    }
}
