// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "doctest.h"

#include "hiergen/classifier.hpp"
#include "hiergen/error.hpp"
#include "hiergen/fixtures.hpp"
#include "hiergen/mock_oracle.hpp"

#include <memory>
#include <string>
#include <vector>

using namespace hiergen;

namespace {

/// Passes calls through and keeps the requests for replaying them by hand.
class Capture final : public CompletionProvider {
public:
    explicit Capture(CompletionProvider& inner) : inner_(inner) {}
    std::size_t context_budget() const noexcept override { return inner_.context_budget(); }
    std::vector<PromptRequest> requests;

protected:
    CompletionResponse do_complete(const PromptRequest& r) override {
        requests.push_back(r);
        return inner_.complete(r);
    }

private:
    CompletionProvider& inner_;
};

MockOracleConfig config_for(const fixtures::ClassificationFixture& fx, double eps, std::uint64_t seed = 0) {
    MockOracleConfig c;
    c.fixture = fx.gold;
    c.noise_rate = eps;
    c.seed = seed;
    return c;
}

const Node& node_labelled(const fixtures::ClassificationFixture& fx, const std::string& label) {
    for (const Node& n : fx.nodes)
        if (n.label == label) return n;
    FAIL("fixture node missing: " << label);
    return fx.nodes.front();
}

} // namespace

TEST_CASE("noiseless classification names exactly the gold category") {
    const auto fx = fixtures::make_classification_fixture();
    MockOracle oracle(config_for(fx, 0.0));
    const Node& lipstick = node_labelled(fx, "lipstick");
    const auto results = classify_batch(std::span(&lipstick, 1), fx.categories, fx.examples, oracle);
    REQUIRE(results.size() == 1);
    CHECK(results[0].categories == std::set<std::string>{"Beauty and Wellness"});
    CHECK(results[0].categories == fx.gold_labels.at(lipstick.id));
    CHECK(oracle.calls() == 1);
}

TEST_CASE("labels unknown to the gold taxonomy answer Other") {
    const auto fx = fixtures::make_classification_fixture();
    MockOracle oracle(config_for(fx, 0.0));
    const Node stranger{NodeId("x:1"), "quantum chromodynamics", fx.categories.node_class, {}};
    const auto results = classify_batch(std::span(&stranger, 1), fx.categories, fx.examples, oracle);
    REQUIRE(results.size() == 1);
    CHECK(results[0].categories == std::set<std::string>{"Other"});
}

TEST_CASE("same seed and request give identical raw text") {
    const auto fx = fixtures::make_classification_fixture();
    MockOracle oracle(config_for(fx, 0.3, 42));
    Capture cap(oracle);
    classify_batch(fx.nodes, fx.categories, fx.examples, cap);
    REQUIRE_FALSE(cap.requests.empty());
    for (const auto& r : cap.requests) {
        MockOracle again(config_for(fx, 0.3, 42));
        CHECK(oracle.complete(r).raw_text == again.complete(r).raw_text);
    }
}

TEST_CASE("different seeds corrupt differently") {
    const auto fx = fixtures::make_classification_fixture();
    MockOracle a(config_for(fx, 0.3, 1));
    MockOracle b(config_for(fx, 0.3, 2));
    const auto ra = classify_batch(fx.nodes, fx.categories, fx.examples, a);
    const auto rb = classify_batch(fx.nodes, fx.categories, fx.examples, b);
    bool any_difference = false;
    for (std::size_t i = 0; i < ra.size(); ++i) any_difference |= ra[i].categories != rb[i].categories;
    CHECK(any_difference);
}

TEST_CASE("observed error rate tracks the configured noise") {
    const auto fx = fixtures::make_classification_fixture();
    const double eps = 0.3;
    std::size_t wrong = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        MockOracle oracle(config_for(fx, eps, seed));
        const auto results = classify_batch(fx.nodes, fx.categories, fx.examples, oracle);
        for (const auto& r : results) {
            ++total;
            if (r.categories != fx.gold_labels.at(r.node)) ++wrong;
        }
    }
    const double rate = double(wrong) / double(total);
    // 2000 trials: binomial sd ~ 0.01. A two-category node is wrong when
    // either label is corrupted, so the rate sits a little above eps.
    CHECK(rate > eps - 0.05);
    CHECK(rate < eps + 0.10);
}

TEST_CASE("fault injection fails matching requests") {
    const auto fx = fixtures::make_classification_fixture();
    auto cfg = config_for(fx, 0.0);
    cfg.fail_when_contains = {"lipstick"};
    MockOracle oracle(cfg);
    const Node& lipstick = node_labelled(fx, "lipstick");
    const Node& other = fx.nodes.front();
    REQUIRE(other.label != "lipstick");
    CHECK_THROWS_AS(classify_batch(std::span(&lipstick, 1), fx.categories, fx.examples, oracle), Error);
    CHECK_NOTHROW(classify_batch(std::span(&other, 1), fx.categories, fx.examples, oracle));
}

TEST_CASE("context budget applies to the mock too") {
    const auto fx = fixtures::make_classification_fixture();
    auto cfg = config_for(fx, 0.0);
    cfg.context_budget_tokens = 64;
    MockOracle oracle(cfg);
    try {
        classify_batch(fx.nodes, fx.categories, fx.examples, oracle);
        FAIL("expected ContextOverflow");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ContextOverflow);
    }
    CHECK(oracle.calls() == 0);
}

TEST_CASE("invalid configurations are rejected") {
    const auto fx = fixtures::make_classification_fixture();
    CHECK_THROWS_AS(MockOracle(MockOracleConfig{}), Error);
    auto cfg = config_for(fx, 1.5);
    CHECK_THROWS_AS(MockOracle{cfg}, Error);
    CHECK(corruption_mode_from_string("drop_node") == CorruptionMode::drop_node);
    CHECK_THROWS_AS(corruption_mode_from_string("sideways"), Error);
}
