// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only
// when every line passes. Runs entirely on the mock provider.

#include "property_runner.hpp"

#include "hiergen/classifier.hpp"
#include "hiergen/cli.hpp"
#include "hiergen/evalstats.hpp"
#include "hiergen/fixtures.hpp"
#include "hiergen/generator.hpp"
#include "hiergen/ingest.hpp"
#include "hiergen/mock_oracle.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace hiergen;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Verdict()>& body) {
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("threw: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("%s  %-40s %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
    std::fflush(stdout);
}

int cli_run(std::vector<std::string> args, std::string* out = nullptr) {
    args.insert(args.begin(), "hiergen");
    std::ostringstream o, e;
    const int code = cli::run(args, o, e);
    spdlog::set_level(spdlog::level::off);  // run() installs its own level
    if (out) *out = o.str();
    return code;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("hiergen_acceptance_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// -- criteria ---------------------------------------------------------------

Verdict table1_intents() {
    const fs::path dir = scratch("intents");
    if (cli_run({"fixture", "intents-table1", "--out-dir", dir.string()}) != 0) return {false, "fixture failed"};
    const auto t0 = Clock::now();
    std::string printed;
    const int code = cli_run({"stats", "--snapshot", (dir / "intents-after.snapshot").string(), "--before",
                              (dir / "intents-before.snapshot").string(), "--class", "intent", "--json",
                              (dir / "stats.json").string()},
                             &printed);
    const double secs = seconds_since(t0);
    if (code != 0) return {false, "stats exit " + std::to_string(code)};
    const auto j = nlohmann::json::parse(slurp(dir / "stats.json"));
    const auto placements = j["placement_histogram"];
    const std::vector<std::size_t> want = {25, 904, 4684, 4961, 3195};
    bool cells = true;
    std::size_t k = 0;
    for (const auto& [label, n] : placements.items()) cells &= k < want.size() && n.get<std::size_t>() == want[k++];
    cells &= k == want.size();
    std::size_t node_sum = 0;
    for (const auto& [label, n] : j["per_level_counts"].items()) node_sum += n.get<std::size_t>();
    const double cov = j["coverage_fraction"].get<double>();
    const bool totals = j["total_nodes"] == 12385 && j["in_hierarchy_before"] == 956 && j["in_hierarchy_after"] == 12339;
    const bool coverage = std::round(cov * 10000.0) == 9963.0;
    const bool pass = totals && cells && coverage && node_sum == 12339 && secs < 5.0 &&
                      printed.find("99.63%") != std::string::npos;
    fs::remove_all(dir);
    return {pass, fmt("total=%zu before=%zu after=%zu placements=%s coverage=%.2f%% node-sum=%zu %.2fs (<5s)",
                      j["total_nodes"].get<std::size_t>(), j["in_hierarchy_before"].get<std::size_t>(),
                      j["in_hierarchy_after"].get<std::size_t>(), placements.dump().c_str(), cov * 100.0, node_sum,
                      secs)};
}

Verdict table1_colors() {
    const fs::path dir = scratch("colors");
    if (cli_run({"fixture", "colors-table1", "--out-dir", dir.string()}) != 0) return {false, "fixture failed"};
    if (cli_run({"stats", "--snapshot", (dir / "colors-after.snapshot").string(), "--before",
                 (dir / "colors-before.snapshot").string(), "--class", "color", "--json",
                 (dir / "stats.json").string()}) != 0)
        return {false, "stats failed"};
    const auto j = nlohmann::json::parse(slurp(dir / "stats.json"));
    fs::remove_all(dir);
    const bool pass = j["total_nodes"] == 328 && j["in_hierarchy_before"] == 12 && j["in_hierarchy_after"] == 328 &&
                      j["coverage_fraction"].get<double>() == 1.0;
    return {pass, fmt("total=%zu before=%zu after=%zu coverage=%.2f%%", j["total_nodes"].get<std::size_t>(),
                      j["in_hierarchy_before"].get<std::size_t>(), j["in_hierarchy_after"].get<std::size_t>(),
                      j["coverage_fraction"].get<double>() * 100.0)};
}

Verdict noiseless_round_trip() {
    std::size_t runs = 0, exact = 0;
    double slowest = 0.0;
    std::string first_miss;
    for (int depth : {3, 4, 5, 6}) {
        for (std::size_t size : {30u, 100u, 250u, 500u}) {
            auto gold = std::make_shared<const Hierarchy>(
                fixtures::make_gold_taxonomy({size, depth, 1, 0.1, std::uint64_t(depth * 1000 + size), "intent"}));
            const Hierarchy kg = fixtures::strip_to_level(*gold, 1);
            const CandidateSet cs = fixtures::candidate_sets(*gold, kg).at(0);
            const std::set<NodeId> candidates(cs.candidates.begin(), cs.candidates.end());
            for (Strategy s : {Strategy::one_shot, Strategy::cyclical}) {
                MockOracleConfig mc;
                mc.fixture = gold;
                MockOracle oracle(mc);
                const auto t0 = Clock::now();
                const HierarchyDelta d = generate(s, kg, cs, oracle);
                const double secs = seconds_since(t0);
                slowest = std::max(slowest, secs);
                ++runs;
                const double f1 = score_edges(d.edges_added, *gold, candidates).f1;
                if (f1 == 1.0 && secs < 10.0) ++exact;
                else if (first_miss.empty())
                    first_miss = fmt(" first miss: depth %d size %zu %s F1=%.4f", depth, size,
                                     std::string(to_string(s)).c_str(), f1);
            }
        }
    }
    return {exact == runs, fmt("%zu/%zu runs F1=1.0 (depths 3-6, sizes 30-500, both strategies); slowest %.3fs (<10s)%s",
                               exact, runs, slowest, first_miss.c_str())};
}

Verdict properties() {
    const auto t0 = Clock::now();
    const auto st = testing::run_property_sequences(1000);
    return {st.ok() && st.sequences >= 1000,
            fmt("%zu sequences, %zu ops, %zu injected mid-apply failures; acyclicity=%zu accounting=%zu atomicity=%zu "
                "violations %.1fs%s",
                st.sequences, st.operations, st.injected_failures, st.acyclicity_failures, st.accounting_failures,
                st.atomicity_failures, seconds_since(t0),
                st.first_failures.empty() ? "" : (" first: " + st.first_failures.front()).c_str())};
}

std::vector<std::pair<std::string, std::string>> pipeline_run(const fs::path& dir) {
    std::vector<std::pair<std::string, std::string>> files;
    if (cli_run({"fixture", "pipeline", "--out-dir", dir.string(), "--nodes", "400", "--depth", "5", "--roots", "4"}) !=
        0)
        return files;
    const std::string cfg = (dir / "config.json").string();
    auto j = nlohmann::json::parse(slurp(cfg));
    j["mock"]["noise_rate"] = 0.1;
    j["passes"] = 3;
    std::ofstream(cfg) << j.dump(2);
    cli_run({"classify", "-c", cfg});
    cli_run({"generate", "-c", cfg});
    std::vector<std::string> merge = {"merge", "-c", cfg, "-o", (dir / "out" / "merged.snapshot").string()};
    std::vector<fs::path> deltas;
    for (const auto& e : fs::directory_iterator(dir / "out"))
        if (e.path().filename().string().rfind("delta-", 0) == 0) deltas.push_back(e.path());
    std::sort(deltas.begin(), deltas.end());
    for (const auto& d : deltas) {
        merge.push_back("--delta");
        merge.push_back(d.string());
    }
    cli_run(merge);
    cli_run({"stats", "-c", cfg, "--snapshot", (dir / "out" / "merged.snapshot").string(), "--before",
             (dir / "kg.snapshot").string(), "--json", (dir / "out" / "stats.json").string()});
    cli_run({"review-export", "-c", cfg, "--snapshot", (dir / "out" / "merged.snapshot").string(), "-o",
             (dir / "out" / "samples.json").string()});
    for (const auto& e : fs::directory_iterator(dir / "out"))
        files.emplace_back(e.path().filename().string(), slurp(e.path()));
    std::sort(files.begin(), files.end());
    return files;
}

Verdict determinism() {
    const auto a = pipeline_run(scratch("det_a"));
    const auto b = pipeline_run(scratch("det_b"));
    fs::remove_all(fs::temp_directory_path() / "hiergen_acceptance_det_a");
    fs::remove_all(fs::temp_directory_path() / "hiergen_acceptance_det_b");
    std::size_t deltas = 0;
    bool has_classification = false, has_snapshot = false, has_report = false;
    for (const auto& [name, text] : a) {
        deltas += name.rfind("delta-", 0) == 0;
        has_classification |= name == "classification.json";
        has_snapshot |= name == "merged.snapshot";
        has_report |= name == "stats.json";
    }
    const bool complete = deltas == 4 && has_classification && has_snapshot && has_report;
    return {complete && a == b, fmt("%zu output files (classification, %zu deltas, snapshot, stats, samples) %s",
                                    a.size(), deltas, a == b ? "byte-identical" : "DIFFER")};
}

Verdict consensus() {
    const auto fx = fixtures::make_classification_fixture();
    auto by_node = [](const std::vector<ClassificationResult>& rs) {
        std::map<NodeId, std::set<std::string>> out;
        for (const auto& r : rs) out[r.node] = r.categories;
        return out;
    };
    auto oracle_for = [&](double eps, std::uint64_t seed) {
        MockOracleConfig c;
        c.fixture = fx.gold;
        c.noise_rate = eps;
        c.seed = seed;
        return std::make_unique<MockOracle>(c);
    };

    const auto reference = by_node(classify_all(fx.nodes, fx.categories, fx.examples, *oracle_for(0.0, 0), 1, 0));
    int identical = 0;
    Rng rng(2026);
    for (int i = 0; i < 10; ++i) {
        auto nodes = fx.nodes;
        rng.shuffle(nodes);
        const int passes = 1 + i % 3;
        identical += by_node(classify_all(nodes, fx.categories, fx.examples, *oracle_for(0.0, 0), passes, 100 + i)) ==
                     reference;
    }

    double single = 0.0, five = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        single += classification_accuracy(
            classify_all(fx.nodes, fx.categories, fx.examples, *oracle_for(0.3, seed), 1, seed), fx.gold_labels);
        five += classification_accuracy(
            classify_all(fx.nodes, fx.categories, fx.examples, *oracle_for(0.3, seed), 5, seed), fx.gold_labels);
    }
    single /= 20.0;
    five /= 20.0;
    return {identical == 10 && five >= single,
            fmt("eps=0: %d/10 permutations identical; eps=0.3, 50 nodes x 20 seeds: passes=5 %.4f >= passes=1 %.4f",
                identical, five, single)};
}

Verdict experiment() {
    const fs::path dir = scratch("experiment");
    const auto t0 = Clock::now();
    std::string printed;
    const int code = cli_run({"experiment", "--eps", "0,0.05,0.1,0.2", "--seeds", "20", "--nodes", "200", "--depth",
                              "5", "-o", (dir / "experiment.json").string()},
                             &printed);
    const double secs = seconds_since(t0);
    if (code != 0) return {false, "experiment exit " + std::to_string(code)};
    const auto j = nlohmann::json::parse(slurp(dir / "experiment.json"));
    fs::remove_all(dir);
    std::size_t tables = 0, zero_cells = 0, zero_perfect = 0;
    std::set<std::string> strategies;
    std::string noisy;
    for (const auto& r : j["results"]) {
        ++tables;
        strategies.insert(r["strategy"].get<std::string>());
        if (r["by_depth"].empty()) return {false, "missing per-depth table"};
        if (r["noise_rate"].get<double>() == 0.0) {
            for (const auto& c : r["by_depth"]) {
                ++zero_cells;
                zero_perfect += c["min_accuracy"].get<double>() == 1.0 && c["mean_accuracy"].get<double>() == 1.0;
            }
        } else if (r["noise_rate"].get<double>() == 0.1) {
            noisy += fmt(" %s@0.1 F1=%.3f", r["strategy"].get<std::string>().c_str(), r["mean_f1"].get<double>());
        }
    }
    const bool pass = secs < 120.0 && tables == 8 && strategies.size() == 2 && zero_cells > 0 &&
                      zero_perfect == zero_cells && printed.find("eps=0.20") != std::string::npos;
    return {pass, fmt("%zu tables (4 eps x 2 strategies, 20 seeds); eps=0 per-depth cells at 1.0: %zu/%zu; %.1fs "
                      "(<120s);%s",
                      tables, zero_perfect, zero_cells, secs, noisy.c_str())};
}

Verdict snapshot_round_trip() {
    GraphSnapshot s{fixtures::make_intents_table1().after, {}};
    const auto t0 = Clock::now();
    const std::string bytes = save_snapshot(s);
    const GraphSnapshot back = load_snapshot(bytes);
    const double secs = seconds_since(t0);
    const bool equal = back == s && save_snapshot(back) == bytes;

    // checksum verified: a one-byte change in the body must be refused
    std::string tampered = bytes;
    const auto pos = tampered.find("romantic message");
    tampered[pos] = 'R';
    bool refused = false;
    try {
        load_snapshot(tampered);
    } catch (const Error& e) {
        refused = e.code() == ErrorCode::CorruptSnapshot;
    }
    return {equal && refused, fmt("%zu nodes, %zu edges, %zu bytes; identity %s; tampered copy %s; %.2fs",
                                  s.hierarchy.node_count(), s.hierarchy.edge_count(), bytes.size(),
                                  equal ? "holds" : "BROKEN", refused ? "rejected (CorruptSnapshot)" : "ACCEPTED", secs)};
}

} // namespace

int main() {
    spdlog::set_level(spdlog::level::off);
    criterion("table1-intents", table1_intents);
    criterion("table1-colors-totals", table1_colors);
    criterion("noiseless-round-trip", noiseless_round_trip);
    criterion("conservation-and-safety-properties", properties);
    criterion("determinism", determinism);
    criterion("consensus-order-invariance", consensus);
    criterion("noise-experiment-harness", experiment);
    criterion("snapshot-round-trip-12k", snapshot_round_trip);
    std::printf("%s: %d failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
