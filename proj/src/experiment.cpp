// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "hiergen/experiment.hpp"

#include "hiergen/random.hpp"

#include <chrono>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <sstream>

namespace hiergen {

namespace {

std::set<NodeId> as_set(const std::vector<NodeId>& v) { return {v.begin(), v.end()}; }

struct Accumulator {
    int runs = 0;
    double precision = 0, recall = 0, f1 = 0, passes = 0, unplaced = 0;
    std::map<int, DepthCell> depth;
    std::map<int, int> depth_runs;

    void add(const EdgeScore& s, const HierarchyDelta& d) {
        ++runs;
        precision += s.precision;
        recall += s.recall;
        f1 += s.f1;
        passes += d.passes;
        unplaced += double(d.unplaced.size());
        for (const auto& cell : s.by_depth) {
            auto& c = depth[cell.level];
            c.level = cell.level;
            c.mean_accuracy += cell.accuracy;
            c.min_accuracy = std::min(c.min_accuracy, cell.accuracy);
            c.max_accuracy = std::max(c.max_accuracy, cell.accuracy);
            c.gold_edges = cell.gold_edges;
            ++depth_runs[cell.level];
        }
    }

    StrategyResult finish(double eps, Strategy strategy) const {
        StrategyResult r{eps, strategy, runs, 0, 0, 0, 0, 0, {}};
        if (runs == 0) return r;
        r.mean_precision = precision / runs;
        r.mean_recall = recall / runs;
        r.mean_f1 = f1 / runs;
        r.mean_passes = passes / runs;
        r.mean_unplaced = unplaced / runs;
        for (auto [level, cell] : depth) {
            cell.mean_accuracy /= depth_runs.at(level);
            r.by_depth.push_back(cell);
        }
        return r;
    }
};

std::set<EdgePair> edge_set(const HierarchyDelta& d) { return {d.edges_added.begin(), d.edges_added.end()}; }

} // namespace

ExperimentReport run_noise_experiment(const ExperimentOptions& o) {
    const auto start = std::chrono::steady_clock::now();
    auto gold = std::make_shared<const Hierarchy>(fixtures::make_gold_taxonomy(o.gold));
    const Hierarchy existing = fixtures::strip_to_level(*gold, o.keep_level);
    const auto sets = fixtures::candidate_sets(*gold, existing);

    ExperimentReport report;
    report.gold_nodes = gold->node_count();
    report.gold_depth = o.gold.depth;

    for (double eps : o.noise_rates) {
        for (Strategy strategy : {Strategy::one_shot, Strategy::cyclical}) {
            Accumulator acc;
            for (int seed = 0; seed < o.seeds; ++seed) {
                MockOracleConfig mc;
                mc.fixture = gold;
                mc.noise_rate = eps;
                mc.seed = static_cast<std::uint64_t>(seed);
                mc.corruption_mode = o.corruption;
                MockOracle oracle(mc);
                for (const CandidateSet& cs : sets) {
                    const HierarchyDelta d = generate(strategy, existing, cs, oracle, o.generator);
                    const Hierarchy gold_sub = gold->subgraph(cs.l1_category);
                    acc.add(score_edges(d.edges_added, gold_sub, as_set(cs.candidates)), d);
                }
            }
            report.results.push_back(acc.finish(eps, strategy));
        }
    }

    // Candidate order probe on the prefix-pair fixture.
    auto prefix_gold = std::make_shared<const Hierarchy>(fixtures::make_prefix_pair_fixture());
    const Hierarchy prefix_existing = fixtures::strip_to_level(*prefix_gold, 1);
    const auto prefix_sets = fixtures::candidate_sets(*prefix_gold, prefix_existing);
    for (double eps : o.noise_rates) {
        if (eps == 0.0) continue;
        for (Strategy strategy : {Strategy::cyclical, Strategy::one_shot}) {
            DivergenceResult div{eps, strategy, 0, 0};
            for (int seed = 0; seed < o.seeds; ++seed) {
                MockOracleConfig mc;
                mc.fixture = prefix_gold;
                mc.noise_rate = eps;
                mc.seed = static_cast<std::uint64_t>(seed);
                mc.corruption_mode = o.corruption;
                MockOracle oracle(mc);
                for (const CandidateSet& cs : prefix_sets) {
                    const auto reference = edge_set(generate(strategy, prefix_existing, cs, oracle, o.generator));
                    Rng rng(mix_seed(static_cast<std::uint64_t>(seed), fnv1a64(cs.l1_category.str())));
                    for (int p = 0; p < o.permutations; ++p) {
                        CandidateSet shuffled = cs;
                        rng.shuffle(shuffled.candidates);
                        ++div.runs;
                        if (edge_set(generate(strategy, prefix_existing, shuffled, oracle, o.generator)) != reference)
                            ++div.diverged;
                    }
                }
            }
            report.divergence.push_back(div);
        }
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

nlohmann::json to_json(const ExperimentReport& r) {
    nlohmann::json results = nlohmann::json::array();
    for (const auto& s : r.results) {
        nlohmann::json depth = nlohmann::json::array();
        for (const auto& c : s.by_depth)
            depth.push_back({{"level", c.level},
                             {"mean_accuracy", c.mean_accuracy},
                             {"min_accuracy", c.min_accuracy},
                             {"max_accuracy", c.max_accuracy},
                             {"gold_edges", c.gold_edges}});
        results.push_back({{"noise_rate", s.noise_rate},
                           {"strategy", to_string(s.strategy)},
                           {"seeds", s.seeds},
                           {"mean_precision", s.mean_precision},
                           {"mean_recall", s.mean_recall},
                           {"mean_f1", s.mean_f1},
                           {"mean_passes", s.mean_passes},
                           {"mean_unplaced", s.mean_unplaced},
                           {"by_depth", std::move(depth)}});
    }
    nlohmann::json divergence = nlohmann::json::array();
    for (const auto& d : r.divergence)
        divergence.push_back({{"noise_rate", d.noise_rate},
                              {"strategy", to_string(d.strategy)},
                              {"runs", d.runs},
                              {"diverged", d.diverged},
                              {"rate", d.rate()}});
    return {{"gold_nodes", r.gold_nodes},
            {"gold_depth", r.gold_depth},
            {"results", std::move(results)},
            {"order_divergence", std::move(divergence)}};
}

std::string format_tables(const ExperimentReport& r) {
    std::ostringstream out;
    char buf[200];
    out << "gold taxonomy: " << r.gold_nodes << " nodes, depth " << r.gold_depth << "\n";
    for (const auto& s : r.results) {
        std::snprintf(buf, sizeof buf, "\neps=%.2f strategy=%s seeds=%d  P=%.4f R=%.4f F1=%.4f passes=%.1f unplaced=%.1f\n",
                      s.noise_rate, std::string(to_string(s.strategy)).c_str(), s.seeds, s.mean_precision,
                      s.mean_recall, s.mean_f1, s.mean_passes, s.mean_unplaced);
        out << buf;
        out << "  level  gold_edges  mean_acc  min_acc  max_acc\n";
        for (const auto& c : s.by_depth) {
            std::snprintf(buf, sizeof buf, "  L%-5d %10zu  %8.4f  %7.4f  %7.4f\n", c.level, c.gold_edges,
                          c.mean_accuracy, c.min_accuracy, c.max_accuracy);
            out << buf;
        }
    }
    if (!r.divergence.empty()) {
        out << "\ncandidate-order divergence (prefix-pair fixture)\n";
        for (const auto& d : r.divergence) {
            std::snprintf(buf, sizeof buf, "  eps=%.2f %-8s %zu/%zu runs diverged (%.1f%%)\n", d.noise_rate,
                          std::string(to_string(d.strategy)).c_str(), d.diverged, d.runs, 100.0 * d.rate());
            out << buf;
        }
    }
    return out.str();
}

} // namespace hiergen
