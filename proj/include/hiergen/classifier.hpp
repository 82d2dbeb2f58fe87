// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#pragma once

#include "hiergen/kg.hpp"
#include "hiergen/prompts.hpp"
#include "hiergen/provider.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace hiergen {

/// The L1 categories for one node class. "Other" is always an available
/// outcome and is never stored here.
struct CategorySet {
    std::vector<std::string> categories;
    std::string node_class;

    void validate() const;
    /// categories plus "Other", as passed to the output parser.
    std::set<std::string> allowed() const;
    /// Position in `categories`; "Other" sorts last.
    std::size_t rank(const std::string& category) const;
};

/// One category per line; blank lines and lines starting with '#' are skipped.
CategorySet load_category_file(const std::filesystem::path& path, std::string node_class);

struct FewShotExample {
    std::string node_label;
    std::set<std::string> assigned_categories;
};

/// JSON list of {"label": ..., "categories": [...]}.
std::vector<FewShotExample> load_examples_file(const std::filesystem::path& path);

enum class ResultProvenance { model, human_corrected };

struct ClassificationResult {
    NodeId node;
    std::set<std::string> categories;  // never mixes "Other" with a real category
    double consensus_support = 1.0;    // share of passes backing the weakest chosen label
    ResultProvenance provenance = ResultProvenance::model;
    bool flagged = false;              // no usable model answer; defaulted to Other
};

nlohmann::json to_json(const std::vector<ClassificationResult>& results);
std::vector<ClassificationResult> classification_results_from_json(const nlohmann::json& j);

enum class PromptMode { few_shot, zero_shot };

inline constexpr std::size_t kDefaultClassifyBatch = 20;
inline constexpr std::size_t kMaxCategoriesPerNode = 3;

struct ClassifyOptions {
    std::size_t batch_size = kDefaultClassifyBatch;
    PromptMode mode = PromptMode::few_shot;
    int max_output_tokens = 4096;
    const TemplateSet* templates = nullptr;  // builtin when null
};

/// One prompt per batch of `batch_size` nodes, results in input order.
std::vector<ClassificationResult> classify_batch(std::span<const Node> nodes, const CategorySet& categories,
                                                 std::span<const FewShotExample> examples,
                                                 CompletionProvider& provider, const ClassifyOptions& options = {});

/// Majority vote over `passes` seeded shuffles of the node order. A tie
/// includes the category; with no majority at all the plurality label wins.
std::vector<ClassificationResult> classify_all(std::span<const Node> nodes, const CategorySet& categories,
                                               std::span<const FewShotExample> examples,
                                               CompletionProvider& provider, int passes, std::uint64_t seed,
                                               const ClassifyOptions& options = {});

using GoldLabels = std::map<NodeId, std::set<std::string>>;

/// Share of gold-labelled nodes whose category set matches exactly.
double classification_accuracy(std::span<const ClassificationResult> results, const GoldLabels& gold);

struct PromptModeReport {
    double few_shot = 0.0;
    double zero_shot = 0.0;
    std::size_t evaluated = 0;
};

PromptModeReport compare_prompt_modes(std::span<const Node> nodes, const CategorySet& categories,
                                      std::span<const FewShotExample> examples, CompletionProvider& provider,
                                      const GoldLabels& gold, const ClassifyOptions& options = {});

} // namespace hiergen
