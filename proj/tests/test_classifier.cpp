// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "doctest.h"

#include "hiergen/classifier.hpp"
#include "hiergen/error.hpp"
#include "hiergen/fixtures.hpp"
#include "hiergen/mock_oracle.hpp"
#include "hiergen/random.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

using namespace hiergen;

namespace {

MockOracle oracle_for(const fixtures::ClassificationFixture& fx, double eps, std::uint64_t seed = 0) {
    MockOracleConfig c;
    c.fixture = fx.gold;
    c.noise_rate = eps;
    c.seed = seed;
    return MockOracle(c);
}

std::map<NodeId, std::set<std::string>> by_node(const std::vector<ClassificationResult>& rs) {
    std::map<NodeId, std::set<std::string>> out;
    for (const auto& r : rs) out[r.node] = r.categories;
    return out;
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

TEST_CASE("category set preconditions") {
    CHECK(code_of([] { CategorySet{{"Only"}, "intent"}.validate(); }) == ErrorCode::PreconditionFailed);
    CHECK(code_of([] { CategorySet{{"A", "Other"}, "intent"}.validate(); }) == ErrorCode::PreconditionFailed);
    CHECK(code_of([] { CategorySet{{"A", "A"}, "intent"}.validate(); }) == ErrorCode::PreconditionFailed);
    const CategorySet ok{{"B", "A"}, "intent"};
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.allowed() == std::set<std::string>{"A", "B", "Other"});
    CHECK(ok.rank("B") < ok.rank("A"));
    CHECK(ok.rank("Other") > ok.rank("A"));
}

TEST_CASE("category and example files") {
    const auto dir = std::filesystem::temp_directory_path() / "hiergen_test_classifier";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "cats.txt") << "# header\nTravel\n\n  Celebrations  \n";
    const auto cats = load_category_file(dir / "cats.txt", "intent");
    CHECK(cats.categories == std::vector<std::string>{"Travel", "Celebrations"});

    std::ofstream(dir / "ex.json") << R"([{"label": "beach trip", "categories": ["Travel"]}])";
    const auto ex = load_examples_file(dir / "ex.json");
    REQUIRE(ex.size() == 1);
    CHECK(ex[0].assigned_categories == std::set<std::string>{"Travel"});

    std::ofstream(dir / "bad.json") << R"({"label": "x"})";
    CHECK(code_of([&] { load_examples_file(dir / "bad.json"); }) == ErrorCode::SchemaError);
    CHECK(code_of([&] { load_category_file(dir / "missing.txt", "intent"); }) == ErrorCode::ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("noiseless classification matches gold, including Other and two-category nodes") {
    const auto fx = fixtures::make_classification_fixture();
    auto oracle = oracle_for(fx, 0.0);
    const auto results = classify_batch(fx.nodes, fx.categories, fx.examples, oracle);
    REQUIRE(results.size() == fx.nodes.size());
    std::size_t other = 0, multi = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(results[i].node == fx.nodes[i].id);
        CHECK(results[i].categories == fx.gold_labels.at(fx.nodes[i].id));
        other += results[i].categories.contains("Other");
        multi += results[i].categories.size() > 1;
    }
    CHECK(other == 5);
    CHECK(multi == 5);
    CHECK(classification_accuracy(results, fx.gold_labels) == 1.0);
    // 50 nodes in batches of 20
    CHECK(oracle.calls() == 3);
}

TEST_CASE("few-shot mode requires examples") {
    const auto fx = fixtures::make_classification_fixture();
    auto oracle = oracle_for(fx, 0.0);
    CHECK(code_of([&] { classify_batch(fx.nodes, fx.categories, {}, oracle); }) == ErrorCode::PreconditionFailed);
    ClassifyOptions zero;
    zero.mode = PromptMode::zero_shot;
    CHECK(classify_batch(fx.nodes, fx.categories, {}, oracle, zero).size() == fx.nodes.size());
}

TEST_CASE("noiseless consensus equals one pass with full support") {
    const auto fx = fixtures::make_classification_fixture();
    auto o1 = oracle_for(fx, 0.0);
    auto o3 = oracle_for(fx, 0.0);
    const auto single = classify_all(fx.nodes, fx.categories, fx.examples, o1, 1, 7);
    const auto triple = classify_all(fx.nodes, fx.categories, fx.examples, o3, 3, 7);
    CHECK(by_node(single) == by_node(triple));
    for (const auto& r : triple) CHECK(r.consensus_support == 1.0);
}

TEST_CASE("noiseless consensus is invariant to input order") {
    const auto fx = fixtures::make_classification_fixture();
    auto base_oracle = oracle_for(fx, 0.0);
    const auto reference = by_node(classify_all(fx.nodes, fx.categories, fx.examples, base_oracle, 2, 0));
    Rng rng(99);
    for (int i = 0; i < 10; ++i) {
        auto nodes = fx.nodes;
        rng.shuffle(nodes);
        auto oracle = oracle_for(fx, 0.0);
        CHECK(by_node(classify_all(nodes, fx.categories, fx.examples, oracle, 2, 1000 + i)) == reference);
    }
}

TEST_CASE("noisy consensus is reproducible") {
    const auto fx = fixtures::make_classification_fixture();
    auto a = oracle_for(fx, 0.3, 5);
    auto b = oracle_for(fx, 0.3, 5);
    const auto ra = classify_all(fx.nodes, fx.categories, fx.examples, a, 5, 11);
    const auto rb = classify_all(fx.nodes, fx.categories, fx.examples, b, 5, 11);
    CHECK(to_json(ra).dump() == to_json(rb).dump());
    for (const auto& r : ra) {
        CHECK(r.consensus_support > 0.0);
        CHECK(r.consensus_support <= 1.0);
        CHECK_FALSE((r.categories.contains("Other") && r.categories.size() > 1));
        CHECK(r.categories.size() <= kMaxCategoriesPerNode);
    }
}

TEST_CASE("consensus over five passes is at least as accurate as one pass") {
    const auto fx = fixtures::make_classification_fixture();
    double single = 0.0, consensus = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto o1 = oracle_for(fx, 0.3, seed);
        auto o5 = oracle_for(fx, 0.3, seed);
        single += classification_accuracy(classify_all(fx.nodes, fx.categories, fx.examples, o1, 1, seed),
                                          fx.gold_labels);
        consensus += classification_accuracy(classify_all(fx.nodes, fx.categories, fx.examples, o5, 5, seed),
                                             fx.gold_labels);
    }
    CHECK(consensus / 20 >= single / 20);
}

TEST_CASE("prompt-mode comparison shows the configured gap") {
    const auto fx = fixtures::make_classification_fixture();
    SUBCASE("noiseless") {
        auto oracle = oracle_for(fx, 0.0);
        const auto r = compare_prompt_modes(fx.nodes, fx.categories, fx.examples, oracle, fx.gold_labels);
        CHECK(r.few_shot == 1.0);
        CHECK(r.zero_shot == 1.0);
        CHECK(r.evaluated == fx.nodes.size());
    }
    SUBCASE("zero-shot noisier by 0.2") {
        double gap = 0.0;
        const int seeds = 20;
        for (int s = 0; s < seeds; ++s) {
            MockOracleConfig c;
            c.fixture = fx.gold;
            c.noise_rate = 0.0;
            c.zero_shot_noise_rate = 0.2;
            c.seed = static_cast<std::uint64_t>(s);
            MockOracle oracle(c);
            const auto r = compare_prompt_modes(fx.nodes, fx.categories, fx.examples, oracle, fx.gold_labels);
            CHECK(r.few_shot == 1.0);
            gap += r.few_shot - r.zero_shot;
        }
        gap /= seeds;
        // 1000 node answers: binomial sd ~0.013; two-label nodes push the
        // expected error slightly above 0.2.
        CHECK(gap > 0.2 - 0.05);
        CHECK(gap < 0.2 + 0.06);
    }
    SUBCASE("empty gold") {
        auto oracle = oracle_for(fx, 0.0);
        CHECK(code_of([&] { compare_prompt_modes(fx.nodes, fx.categories, fx.examples, oracle, {}); }) ==
              ErrorCode::PreconditionFailed);
    }
}

TEST_CASE("results JSON round-trip") {
    const auto fx = fixtures::make_classification_fixture();
    auto oracle = oracle_for(fx, 0.3, 3);
    const auto rs = classify_all(fx.nodes, fx.categories, fx.examples, oracle, 3, 3);
    const auto back = classification_results_from_json(to_json(rs));
    CHECK(to_json(back) == to_json(rs));
    CHECK(code_of([] { classification_results_from_json(nlohmann::json::object({{"x", 1}})); }) ==
          ErrorCode::SchemaError);
}
