// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "doctest.h"

#include "hiergen/error.hpp"
#include "hiergen/fixtures.hpp"
#include "hiergen/generator.hpp"
#include "hiergen/mock_oracle.hpp"

#include <deque>
#include <memory>
#include <set>

using namespace hiergen;

namespace {

std::shared_ptr<const Hierarchy> gold_of(std::size_t nodes, int depth, double multi = 0.1, std::uint64_t seed = 1) {
    return std::make_shared<const Hierarchy>(fixtures::make_gold_taxonomy({nodes, depth, 1, multi, seed, "intent"}));
}

MockOracle oracle_for(std::shared_ptr<const Hierarchy> gold, double eps = 0.0, std::uint64_t seed = 0) {
    MockOracleConfig c;
    c.fixture = std::move(gold);
    c.noise_rate = eps;
    c.seed = seed;
    c.corruption_mode = CorruptionMode::spurious_parent;
    return MockOracle(c);
}

std::set<NodeId> as_set(const std::vector<NodeId>& v) { return {v.begin(), v.end()}; }

/// Every candidate is placed or unplaced, and the edges keep the graph a DAG.
void check_accounting(const Hierarchy& kg, const CandidateSet& cs, const HierarchyDelta& d) {
    std::set<NodeId> placed;
    for (const auto& [p, c] : d.edges_added) placed.insert(c);
    for (const NodeId& c : cs.candidates) CHECK((placed.contains(c) || d.unplaced.contains(c)));
    for (const NodeId& c : placed) CHECK_FALSE(d.unplaced.contains(c));
    Hierarchy g = kg;
    for (const auto& [p, c] : d.edges_added) g.add_edge(p, c);
    CHECK(g.validate().empty());
}

class ScriptedProvider final : public CompletionProvider {
public:
    explicit ScriptedProvider(std::deque<std::string> script) : script_(std::move(script)) {}
    std::size_t context_budget() const noexcept override { return kDefaultContextBudget; }
    int calls = 0;

protected:
    CompletionResponse do_complete(const PromptRequest&) override {
        ++calls;
        REQUIRE_FALSE(script_.empty());
        CompletionResponse r{script_.front(), FinishReason::complete, {}};
        script_.pop_front();
        return r;
    }

private:
    std::deque<std::string> script_;
};

} // namespace

TEST_CASE("strategy selection") {
    SUBCASE("50-node subtree with 20 candidates fits") {
        const auto gold = gold_of(70, 4, 0.0, 3);
        // keep the first 50 nodes in the tree, offer the other 20
        Hierarchy kg = *gold;
        const auto& nodes = gold->nodes();
        std::vector<NodeId> candidates;
        for (std::size_t i = 50; i < nodes.size(); ++i) {
            for (const NodeId& p : gold->parents(nodes[i].id)) kg.remove_edge(p, nodes[i].id);
            for (const NodeId& c : gold->children(nodes[i].id)) kg.remove_edge(nodes[i].id, c);
            candidates.push_back(nodes[i].id);
        }
        CandidateSet cs{gold->roots()[0], candidates};
        const auto choice = select_strategy(kg, cs, 32768);
        CHECK(choice.strategy == Strategy::one_shot);
        CHECK(choice.estimated_tokens > 0);
        CHECK(choice.estimated_tokens < 32768);
    }
    SUBCASE("oversized rendering goes cyclical") {
        Hierarchy kg("intent");
        kg.register_class("intent");
        kg.add_node({NodeId("r"), "root", "intent", {}});
        kg.add_root(NodeId("r"));
        std::vector<NodeId> candidates;
        for (int i = 0; i < 2000; ++i) {
            const std::string id = "c" + std::to_string(i);
            kg.add_node({NodeId(id), "candidate label number " + std::to_string(i) + std::string(80, 'x'), "intent", {}});
            candidates.push_back(NodeId(id));
        }
        const auto choice = select_strategy(kg, {NodeId("r"), candidates}, 32768);
        CHECK(choice.estimated_tokens * 4 >= 200000);
        CHECK(choice.strategy == Strategy::cyclical);
    }
    SUBCASE("empty candidate set") {
        const auto gold = gold_of(30, 3);
        const auto choice = select_strategy(*gold, {gold->roots()[0], {}}, 32768);
        CHECK(choice.strategy == Strategy::one_shot);
    }
}

TEST_CASE("one-shot reproduces a 30-node category") {
    const auto gold = gold_of(30, 4, 0.0);
    const Hierarchy kg = fixtures::strip_to_level(*gold, 1);
    const auto sets = fixtures::candidate_sets(*gold, kg);
    REQUIRE(sets.size() == 1);
    auto oracle = oracle_for(gold);
    const auto d = generate_one_shot(kg, sets[0], oracle);
    CHECK(d.unplaced.empty());
    CHECK(d.edges_added.size() == gold->edge_count());
    CHECK(score_edges(d.edges_added, *gold, as_set(sets[0].candidates)).f1 == 1.0);
    CHECK(d.passes == 1);
    CHECK(d.strategy_used == Strategy::one_shot);
}

TEST_CASE("noiseless round-trip across depths, sizes and both strategies") {
    for (int depth : {3, 4, 5, 6}) {
        for (std::size_t size : {30u, 120u, 300u}) {
            const auto gold = gold_of(size, depth, 0.1, depth * 100 + size);
            const Hierarchy kg = fixtures::strip_to_level(*gold, 1);
            const auto sets = fixtures::candidate_sets(*gold, kg);
            REQUIRE(sets.size() == 1);
            for (Strategy s : {Strategy::one_shot, Strategy::cyclical}) {
                CAPTURE(depth);
                CAPTURE(size);
                CAPTURE(to_string(s));
                auto oracle = oracle_for(gold);
                GeneratorOptions opt;
                opt.batch_size = 40;  // several batches plus the correction pass for larger sizes
                const auto d = generate(s, kg, sets[0], oracle, opt);
                const auto score = score_edges(d.edges_added, *gold, as_set(sets[0].candidates));
                CHECK(score.f1 == 1.0);
                CHECK(d.unplaced.empty());
                check_accounting(kg, sets[0], d);
            }
        }
    }
}

TEST_CASE("batched one-shot makes one correction call") {
    const auto gold = gold_of(120, 4, 0.1, 8);
    const Hierarchy kg = fixtures::strip_to_level(*gold, 1);
    const auto cs = fixtures::candidate_sets(*gold, kg)[0];
    auto oracle = oracle_for(gold);
    GeneratorOptions opt;
    opt.batch_size = 50;
    const auto d = generate_one_shot(kg, cs, oracle, opt);
    const std::size_t batches = (cs.candidates.size() + 49) / 50;
    CHECK(d.passes == static_cast<int>(batches) + 1);
}

TEST_CASE("empty candidates cost nothing") {
    const auto gold = gold_of(30, 3);
    const CandidateSet cs{gold->roots()[0], {}};
    for (Strategy s : {Strategy::one_shot, Strategy::cyclical}) {
        auto oracle = oracle_for(gold);
        const auto d = generate(s, *gold, cs, oracle);
        CHECK(d.edges_added.empty());
        CHECK(d.unplaced.empty());
        CHECK(d.passes == 0);
        CHECK(oracle.calls() == 0);
    }
}

TEST_CASE("cyclical stops early on exhaustion") {
    const auto gold = gold_of(40, 3, 0.0, 4);
    const Hierarchy kg = fixtures::strip_to_level(*gold, 1);
    const auto cs = fixtures::candidate_sets(*gold, kg)[0];
    auto oracle = oracle_for(gold);
    GeneratorOptions opt;
    opt.max_depth = 6;
    const auto d = generate_cyclical(kg, cs, oracle, opt);
    CHECK(score_edges(d.edges_added, *gold, as_set(cs.candidates)).f1 == 1.0);
    // two calls per expanded node at most, and only nodes above the leaves expand
    std::size_t inner = 0;
    for (const Node& n : gold->nodes())
        if (!gold->children(n.id).empty()) ++inner;
    CHECK(d.passes <= static_cast<int>(2 * inner));
}

TEST_CASE("cyclical with a shallow depth limit still accounts for every candidate") {
    const auto gold = gold_of(60, 4, 0.1, 5);
    const Hierarchy kg = fixtures::strip_to_level(*gold, 1);
    const auto cs = fixtures::candidate_sets(*gold, kg)[0];
    auto oracle = oracle_for(gold);
    GeneratorOptions opt;
    opt.max_depth = 2;
    const auto d = generate_cyclical(kg, cs, oracle, opt);
    check_accounting(kg, cs, d);
    Hierarchy g = kg;
    for (const auto& [p, c] : d.edges_added) g.add_edge(p, c);
    for (const NodeId& c : cs.candidates)
        if (!d.unplaced.contains(c)) CHECK(*g.level_of(c) <= 2);
    CHECK_FALSE(d.unplaced.empty());
}

TEST_CASE("invented labels are rejected and their nodes left unplaced") {
    Hierarchy kg("intent");
    kg.register_class("intent");
    kg.add_node({NodeId("h"), "Health", "intent", {}});
    kg.add_node({NodeId("f"), "fitness", "intent", {}});
    kg.add_node({NodeId("y"), "yoga", "intent", {}});
    kg.add_root(NodeId("h"));
    ScriptedProvider p({R"({"Health": {"wellnessology": {"yoga": {}}, "fitness": {}}})"});
    const auto d = generate_one_shot(kg, {NodeId("h"), {NodeId("f"), NodeId("y")}}, p);
    CHECK(d.rejected_labels == std::vector<std::string>{"wellnessology"});
    CHECK(d.unplaced == std::set<NodeId>{NodeId("y")});
    REQUIRE(d.edges_added.size() == 1);
    CHECK(d.edges_added[0] == EdgePair{NodeId("h"), NodeId("f")});
    CHECK(p.calls == 1);
}

TEST_CASE("generation preconditions") {
    const auto gold = gold_of(30, 3);
    auto oracle = oracle_for(gold);
    const NodeId root = gold->roots()[0];
    const NodeId inside = gold->children(root)[0];
    CHECK_THROWS_AS(generate_one_shot(*gold, {root, {inside}}, oracle), Error);
    CHECK_THROWS_AS(generate_one_shot(*gold, {NodeId("nope"), {}}, oracle), Error);
}

TEST_CASE("review finds the misplaced node and suggests its gold parent") {
    const auto fx = fixtures::make_love_marriage_fixture();
    auto oracle = oracle_for(fx.gold);
    const auto out = review_pass(fx.generated, oracle);
    REQUIRE(out.findings.size() == 1);
    const auto& f = out.findings[0];
    CHECK(f.kind == FindingKind::wrong_parent);
    CHECK(fx.generated.node(f.node).label == "mom dad");
    CHECK(fx.generated.node(f.current_parent).label == "love");
    REQUIRE(f.suggested_parent.has_value());
    CHECK(fx.generated.node(*f.suggested_parent).label == "marriage");
    CHECK(out.calls == 1);
}

TEST_CASE("review of a correct hierarchy finds nothing") {
    const auto fx = fixtures::make_love_marriage_fixture();
    auto oracle = oracle_for(fx.gold);
    CHECK(review_pass(*fx.gold, oracle).findings.empty());
}

TEST_CASE("review drops findings that would close a cycle or name strangers") {
    Hierarchy h("intent");
    h.register_class("intent");
    for (const char* l : {"root", "a", "b"}) h.add_node({NodeId(l), l, "intent", {}});
    h.add_root(NodeId("root"));
    h.add_edge(NodeId("root"), NodeId("a"));
    h.add_edge(NodeId("a"), NodeId("b"));
    ScriptedProvider p({R"({"verdict": "needs_changes", "findings": [
        {"kind": "wrong_parent", "node": "a", "current_parent": "root", "suggested_parent": "b"},
        {"kind": "wrong_parent", "node": "ghost", "current_parent": "root", "suggested_parent": "a"},
        {"kind": "wrong_parent", "node": "b", "current_parent": "root", "suggested_parent": "root"}]})"});
    const auto out = review_pass(h, p);
    CHECK(out.findings.empty());
    CHECK(out.warnings.size() == 3);
}

TEST_CASE("subgraph evaluation") {
    const auto gold = gold_of(40, 4, 0.0, 12);
    const NodeId root = gold->roots()[0];
    SUBCASE("gold subtree is approved") {
        auto oracle = oracle_for(gold);
        const auto v = evaluate_subgraph(gold->subgraph(root), oracle);
        CHECK(v.approved);
        CHECK(v.findings.empty());
        CHECK(v.calls == 1);
    }
    SUBCASE("one planted wrong edge is found") {
        Hierarchy planted = gold->subgraph(root);
        // move a level-3 node under a level-2 node that is not its gold parent
        NodeId victim, old_parent, new_parent;
        for (const NodeId& l2 : planted.children(root)) {
            for (const NodeId& l3 : planted.children(l2)) {
                for (const NodeId& other : planted.children(root))
                    if (other != l2 && !planted.reaches(l3, other) && !gold->has_edge(other, l3)) {
                        victim = l3, old_parent = l2, new_parent = other;
                        break;
                    }
                if (!victim.empty()) break;
            }
            if (!victim.empty()) break;
        }
        REQUIRE_FALSE(victim.empty());
        planted.remove_edge(old_parent, victim);
        planted.add_edge(new_parent, victim);
        auto oracle = oracle_for(gold);
        const auto v = evaluate_subgraph(planted, oracle);
        CHECK_FALSE(v.approved);
        REQUIRE(v.findings.size() == 1);
        CHECK(v.findings[0].node == victim);
        CHECK(v.findings[0].suggested_parent == old_parent);
    }
    SUBCASE("single node is vacuously approved") {
        auto oracle = oracle_for(gold);
        const auto leaf = gold->subgraph(gold->nodes().back().id);
        const auto v = evaluate_subgraph(leaf, oracle);
        CHECK(v.approved);
        CHECK(v.calls == 0);
    }
}

TEST_CASE("delta JSON round-trip and fingerprint check") {
    const auto gold = gold_of(30, 3, 0.1, 2);
    const Hierarchy kg = fixtures::strip_to_level(*gold, 2);
    const auto sets = fixtures::candidate_sets(*gold, kg);
    REQUIRE_FALSE(sets.empty());
    auto oracle = oracle_for(gold);
    const auto d = generate_one_shot(kg, sets[0], oracle);
    CHECK_FALSE(d.base_edges.empty());
    CHECK(d.base_fingerprint == edges_fingerprint(d.l1_category, subgraph_edges(kg, d.l1_category)));

    const auto j = to_json(d);
    const auto back = delta_from_json(j);
    CHECK(to_json(back) == j);

    auto tampered = j;
    tampered["base_edges"].erase(tampered["base_edges"].begin());
    CHECK_THROWS_AS(delta_from_json(tampered), Error);
}

TEST_CASE("edge scoring") {
    const auto gold = gold_of(20, 3, 0.0, 6);
    std::set<NodeId> candidates;
    std::vector<EdgePair> all;
    for (const Edge& e : gold->edges()) {
        candidates.insert(e.child);
        all.emplace_back(e.parent, e.child);
    }
    CHECK(score_edges(all, *gold, candidates).f1 == 1.0);

    auto half = all;
    half.resize(all.size() / 2);
    const auto s = score_edges(half, *gold, candidates);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == doctest::Approx(double(half.size()) / double(all.size())));

    auto wrong = all;
    wrong[0] = {wrong[0].second, wrong[0].first};
    CHECK(score_edges(wrong, *gold, candidates).precision < 1.0);
}
