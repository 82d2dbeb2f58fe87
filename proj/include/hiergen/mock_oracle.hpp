// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#pragma once

#include "hiergen/kg.hpp"
#include "hiergen/prompts.hpp"
#include "hiergen/provider.hpp"
#include "hiergen/random.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hiergen {

enum class CorruptionMode { wrong_category, spurious_parent, drop_node };

std::string_view to_string(CorruptionMode m) noexcept;
CorruptionMode corruption_mode_from_string(std::string_view s);

struct MockOracleConfig {
    std::shared_ptr<const Hierarchy> fixture;  // gold taxonomy
    double noise_rate = 0.0;                   // per answered element
    std::optional<double> zero_shot_noise_rate;  // used for requests without few-shot examples
    std::uint64_t seed = 0;
    CorruptionMode corruption_mode = CorruptionMode::wrong_category;
    std::vector<std::string> fail_when_contains;  // fault injection: matching payloads get provider_error
    std::size_t context_budget_tokens = kDefaultContextBudget;
};

/// Deterministic stand-in for the completion model.
///
/// Reads the task out of the prompt sections, answers from the gold
/// taxonomy, then corrupts each answered element independently with
/// probability `noise_rate`. Randomness is derived from (seed, request), so
/// call order and concurrency never change an answer.
///
/// How the corruption mode applies per task:
///   classify        wrong_category / spurious_parent: one random other category; drop_node: omit the node
///   place, correct  spurious_parent / wrong_category: one parent replaced by a random known node; drop_node: omit the node
///   level           drop_node: omit (reads as defer); otherwise flip keep/defer
///   route           drop_node: omit; otherwise a single random level node
///   review/evaluate drop_node: finding omitted; otherwise random suggested parent
class MockOracle final : public CompletionProvider {
public:
    explicit MockOracle(MockOracleConfig config);

    std::size_t context_budget() const noexcept override { return config_.context_budget_tokens; }
    std::size_t calls() const noexcept { return calls_.load(); }
    const MockOracleConfig& config() const noexcept { return config_; }

protected:
    CompletionResponse do_complete(const PromptRequest& request) override;

private:
    std::optional<NodeId> gold_id(const std::string& label) const;
    std::unordered_set<NodeId> gold_ancestors(const NodeId& id) const;
    /// Closest gold ancestors of `label` that are members of `known` (by normalized label).
    std::vector<std::string> nearest_in(const std::string& label,
                                        const std::unordered_map<std::string, std::string>& known) const;

    std::string answer_classify(const PromptSections& s, double eps, Rng& rng) const;
    std::string answer_place(const PromptSections& s, double eps, Rng& rng) const;
    std::string answer_level(const PromptSections& s, double eps, Rng& rng) const;
    std::string answer_route(const PromptSections& s, double eps, Rng& rng) const;
    std::string answer_review(const PromptSections& s, bool evaluate, double eps, Rng& rng) const;

    MockOracleConfig config_;
    std::unordered_map<std::string, NodeId> by_label_;  // normalized label -> first gold node
    std::unordered_map<NodeId, std::vector<std::string>> l1_of_;  // gold L1 root labels per node
    std::atomic<std::size_t> calls_{0};
};

std::unique_ptr<CompletionProvider> make_provider(const ProviderConfig& config);
std::unique_ptr<CompletionProvider> make_provider(const MockOracleConfig& config);

} // namespace hiergen
