// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#pragma once

#include "hiergen/fixtures.hpp"
#include "hiergen/generator.hpp"
#include "hiergen/mock_oracle.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace hiergen {

/// Noise sweep comparing the two generation strategies against a gold
/// taxonomy answered by the mock oracle.
struct ExperimentOptions {
    std::vector<double> noise_rates{0.0, 0.05, 0.1, 0.2};
    int seeds = 20;
    fixtures::GoldOptions gold{200, 5, 1, 0.1, 1, "intent"};
    int keep_level = 1;  // existing structure handed to the generator
    GeneratorOptions generator;
    CorruptionMode corruption = CorruptionMode::spurious_parent;
    int permutations = 5;  // candidate-order shuffles for the divergence probe
};

struct DepthCell {
    int level = 0;
    double mean_accuracy = 0.0;
    double min_accuracy = 1.0;
    double max_accuracy = 0.0;
    std::size_t gold_edges = 0;  // per run
};

struct StrategyResult {
    double noise_rate = 0.0;
    Strategy strategy = Strategy::one_shot;
    int seeds = 0;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double mean_f1 = 0.0;
    double mean_passes = 0.0;
    double mean_unplaced = 0.0;
    std::vector<DepthCell> by_depth;
};

struct DivergenceResult {
    double noise_rate = 0.0;
    Strategy strategy = Strategy::cyclical;
    std::size_t runs = 0;       // permuted runs compared with the original order
    std::size_t diverged = 0;   // of those, runs whose edge set differs
    double rate() const { return runs == 0 ? 0.0 : double(diverged) / double(runs); }
};

struct ExperimentReport {
    std::size_t gold_nodes = 0;
    int gold_depth = 0;
    std::vector<StrategyResult> results;
    std::vector<DivergenceResult> divergence;  // prefix-pair fixture
    double seconds = 0.0;
};

ExperimentReport run_noise_experiment(const ExperimentOptions& options);
nlohmann::json to_json(const ExperimentReport& r);
/// One per-depth accuracy table per (noise rate, strategy).
std::string format_tables(const ExperimentReport& r);

} // namespace hiergen
