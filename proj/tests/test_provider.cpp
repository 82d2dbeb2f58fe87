// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "doctest.h"

#include "hiergen/error.hpp"
#include "hiergen/fixtures.hpp"
#include "hiergen/prompts.hpp"
#include "hiergen/provider.hpp"

#include <deque>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

using namespace hiergen;

namespace {

/// Hands out canned answers in order and records every request it saw.
class ScriptedProvider final : public CompletionProvider {
public:
    explicit ScriptedProvider(std::deque<CompletionResponse> script, std::size_t budget = kDefaultContextBudget)
        : script_(std::move(script)), budget_(budget) {}

    std::size_t context_budget() const noexcept override { return budget_; }
    std::vector<PromptRequest> seen;

protected:
    CompletionResponse do_complete(const PromptRequest& request) override {
        seen.push_back(request);
        REQUIRE_FALSE(script_.empty());
        auto r = script_.front();
        script_.pop_front();
        return r;
    }

private:
    std::deque<CompletionResponse> script_;
    std::size_t budget_;
};

CompletionResponse answer(std::string text, FinishReason reason = FinishReason::complete) {
    return {std::move(text), reason, {}};
}

PromptRequest small_request() {
    PromptRequest r;
    r.system_instruction = "Classify.";
    r.payload = "### task: classify\n";
    r.max_output_tokens = 256;
    return r;
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

const std::set<std::string> kAllowed = {"Celebrations", "Travel", "Other"};

} // namespace

TEST_CASE("estimate_tokens") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("xy") >= estimate_tokens("x"));
    const std::string prompt(4000, 'a');
    const auto est = estimate_tokens(prompt);
    CHECK(est >= prompt.size() / 6);
    CHECK(est <= prompt.size() / 2);
}

TEST_CASE("estimate_request_tokens counts examples and payload") {
    PromptRequest r = small_request();
    const auto base = estimate_request_tokens(r);
    r.few_shot_examples.push_back({std::string(400, 'i'), std::string(400, 'o')});
    CHECK(estimate_request_tokens(r) == base + 200);
}

TEST_CASE("oversized request is refused before any call") {
    ScriptedProvider p({}, 1000);
    PromptRequest r = small_request();
    r.payload = std::string(40000, 'x');
    CHECK(code_of([&] { p.complete(r); }) == ErrorCode::ContextOverflow);
    CHECK(p.seen.empty());

    // output reservation alone can overflow the budget
    PromptRequest r2 = small_request();
    r2.max_output_tokens = 950;
    CHECK_FALSE(fits_context(r2, 1000));
    r2.max_output_tokens = 800;
    CHECK(fits_context(r2, 1000));
}

TEST_CASE("provider_error becomes ProviderUnavailable") {
    ScriptedProvider p({answer("", FinishReason::provider_error)});
    CHECK(code_of([&] { p.complete(small_request()); }) == ErrorCode::ProviderUnavailable);
}

TEST_CASE("parse_classification") {
    SUBCASE("well-formed dictionary") {
        auto m = parse_classification(R"(Sure: {"birthday card": ["Celebrations"]} done)", kAllowed);
        REQUIRE(m.size() == 1);
        CHECK(m.at("birthday card") == std::set<std::string>{"Celebrations"});
    }
    SUBCASE("no dictionary") {
        CHECK(code_of([] { parse_classification("I think it's probably Travel", kAllowed); }) ==
              ErrorCode::UnparseableOutput);
    }
    SUBCASE("category outside the allowed set names it") {
        try {
            parse_classification(R"({"beach trip": ["Vacations"]})", kAllowed);
            FAIL("expected IllegalCategory");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::IllegalCategory);
            CHECK(std::string(e.what()).find("Vacations") != std::string::npos);
        }
    }
    SUBCASE("category spelling is canonicalized") {
        auto m = parse_classification(R"({"x": ["  travel "], "y": "other"})", kAllowed);
        CHECK(m.at("x") == std::set<std::string>{"Travel"});
        CHECK(m.at("y") == std::set<std::string>{"Other"});
    }
    SUBCASE("empty lists are omitted") {
        CHECK(parse_classification(R"({"x": []})", kAllowed).empty());
    }
}

TEST_CASE("extract_dictionary skips braces that are not JSON objects") {
    auto d = extract_dictionary(R"(use {curly} then {"a": {"b": "}"}})");
    REQUIRE(d.has_value());
    CHECK(d->at("a").at("b") == "}");
    CHECK_FALSE(extract_dictionary("nothing here").has_value());
}

TEST_CASE("parse_hierarchy") {
    SUBCASE("nested dictionary") {
        auto p = parse_hierarchy(R"({"Health": {"fitness": {}}})", {"Health", "fitness"});
        REQUIRE(p.edges.size() == 1);
        CHECK(p.edges[0] == std::pair<std::string, std::string>{"Health", "fitness"});
        CHECK(p.rejected_labels.empty());
        CHECK(p.top_level == std::vector<std::string>{"Health"});
    }
    SUBCASE("invented label is rejected with its edges") {
        auto p = parse_hierarchy(R"({"Health": {"wellnessology": {"fitness": {}}, "yoga": {}}})",
                                 {"Health", "fitness", "yoga"});
        CHECK(p.rejected_labels == std::vector<std::string>{"wellnessology"});
        REQUIRE(p.edges.size() == 1);
        CHECK(p.edges[0].second == "yoga");
        CHECK(p.mentioned.contains("fitness"));
    }
    SUBCASE("rendered 10-node gold category parses back to its 9 edges") {
        const Hierarchy gold = fixtures::make_gold_taxonomy({10, 3, 1, 0.0, 3, "intent"});
        std::set<std::string> known;
        for (const Node& n : gold.nodes()) known.insert(n.label);
        const auto p = parse_hierarchy(nest_hierarchy(gold).dump(2), known);
        CHECK(p.edges.size() == 9);
        for (const auto& [parent, child] : p.edges)
            CHECK(gold.has_edge(*gold.find_by_label("intent", parent), *gold.find_by_label("intent", child)));
    }
}

TEST_CASE("complete_structured repairs unusable answers") {
    SUBCASE("recovers on the second attempt and shows the error") {
        ScriptedProvider p({answer("no idea"), answer(R"({"x": ["Travel"]})")});
        int calls = 0;
        auto m = complete_structured(
            p, small_request(), [](std::string_view t) { return parse_classification(t, kAllowed); }, calls);
        CHECK(calls == 2);
        CHECK(m.at("x") == std::set<std::string>{"Travel"});
        REQUIRE(p.seen.size() == 2);
        CHECK(p.seen[1].payload.find("UnparseableOutput") != std::string::npos);
    }
    SUBCASE("gives up after the repair budget") {
        std::deque<CompletionResponse> script;
        for (int i = 0; i <= kMaxRepairAttempts; ++i) script.push_back(answer(R"({"x": ["Mars"]})"));
        ScriptedProvider p(script);
        int calls = 0;
        CHECK(code_of([&] {
                  complete_structured(
                      p, small_request(), [](std::string_view t) { return parse_classification(t, kAllowed); },
                      calls);
              }) == ErrorCode::IllegalCategory);
        CHECK(calls == kMaxRepairAttempts + 1);
    }
    SUBCASE("truncated answers are retried") {
        ScriptedProvider p({answer(R"({"x": ["Tra)", FinishReason::truncated), answer(R"({"x": "Travel"})")});
        int calls = 0;
        auto m = complete_structured(
            p, small_request(), [](std::string_view t) { return parse_classification(t, kAllowed); }, calls);
        CHECK(calls == 2);
        CHECK(m.size() == 1);
    }
    SUBCASE("provider failure is not retried") {
        ScriptedProvider p({answer("", FinishReason::provider_error)});
        int calls = 0;
        CHECK(code_of([&] {
                  complete_structured(
                      p, small_request(), [](std::string_view t) { return parse_classification(t, kAllowed); },
                      calls);
              }) == ErrorCode::ProviderUnavailable);
        CHECK(calls == 1);
    }
}

TEST_CASE("request_hash is stable and content-sensitive") {
    PromptRequest a = small_request();
    PromptRequest b = small_request();
    CHECK(request_hash(a) == request_hash(b));
    b.payload += "x";
    CHECK(request_hash(a) != request_hash(b));
    CHECK(request_hash(a).size() == 64);
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("recorded calls replay by request hash") {
    const auto dir = std::filesystem::temp_directory_path() / "hiergen_test_provider";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto file = dir / "replay.jsonl";

    auto inner = std::make_shared<ScriptedProvider>(
        std::deque<CompletionResponse>{answer(R"({"x": ["Travel"]})"), answer(R"({"y": ["Other"]})")});
    RecordingProvider rec(inner, file);
    PromptRequest r1 = small_request();
    PromptRequest r2 = small_request();
    r2.payload += "second\n";
    const auto a1 = rec.complete(r1);
    const auto a2 = rec.complete(r2);

    ReplayProvider replay(file);
    CHECK(replay.size() == 2);
    CHECK(replay.complete(r2).raw_text == a2.raw_text);
    CHECK(replay.complete(r1).raw_text == a1.raw_text);

    PromptRequest unknown = small_request();
    unknown.payload = "never recorded";
    CHECK(code_of([&] { replay.complete(unknown); }) == ErrorCode::ProviderUnavailable);

    std::ofstream(dir / "bad.jsonl") << "{not json\n";
    CHECK(code_of([&] { ReplayProvider bad(dir / "bad.jsonl"); }) == ErrorCode::SchemaError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("prompt request JSON round-trip") {
    PromptRequest r = small_request();
    r.few_shot_examples.push_back({"in", "out"});
    r.temperature = 0.5;
    const PromptRequest back = prompt_request_from_json(to_json(r));
    CHECK(back.system_instruction == r.system_instruction);
    CHECK(back.payload == r.payload);
    REQUIRE(back.few_shot_examples.size() == 1);
    CHECK(back.few_shot_examples[0].output == "out");
    CHECK(request_hash(back) == request_hash(r));
}

TEST_CASE("templates fill placeholders and leave other braces alone") {
    CHECK(fill("{a} and {\"json\": {}} {missing}", {{"a", "X"}}) == "X and {\"json\": {}} {missing}");
    const auto& t = TemplateSet::defaults();
    CHECK_FALSE(t.version().empty());
    for (auto k : {TaskKind::classify, TaskKind::place, TaskKind::correct, TaskKind::level, TaskKind::route,
                   TaskKind::review, TaskKind::evaluate}) {
        CHECK_FALSE(t.at(k).system.empty());
        CHECK_FALSE(t.at(k).user.empty());
    }
    const auto s = parse_sections("### task: route\n### parent\n\"A\"\n### nodes\n[\"b\"]\n");
    CHECK(s.kind == TaskKind::route);
    CHECK(s.json("nodes").size() == 1);
    CHECK(code_of([&] { s.json("missing"); }) == ErrorCode::SchemaError);
}
