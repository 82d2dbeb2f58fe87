// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "hiergen/cli.hpp"

#include "hiergen/classifier.hpp"
#include "hiergen/evalstats.hpp"
#include "hiergen/experiment.hpp"
#include "hiergen/fixtures.hpp"
#include "hiergen/generator.hpp"
#include "hiergen/serve.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace hiergen::cli {

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::UnsupportedVersion:
    case ErrorCode::CorruptSnapshot: return kConfigError;
    case ErrorCode::ProviderUnavailable:
    case ErrorCode::ContextOverflow:
    case ErrorCode::Truncated:
    case ErrorCode::UnparseableOutput:
    case ErrorCode::IllegalCategory: return kProviderError;
    default: return kValidationError;
    }
}

// Configuration --------------------------------------------------------------

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<std::string_view> known, std::string_view where) {
    for (const auto& [key, value] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw Error(ErrorCode::ConfigError, "unknown key '" + key + "' in " + std::string(where));
}

} // namespace

PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base) {
    try {
        reject_unknown_keys(j,
                            {"snapshot", "categories", "examples", "templates", "output_dir", "node_class", "provider",
                             "mock", "strategy", "seed", "classify_batch_size", "generate_batch_size", "max_depth",
                             "passes", "timestamp"},
                            "config");
        PipelineConfig c;
        c.snapshot = resolve(base, j.value("snapshot", std::string{}));
        c.categories = resolve(base, j.value("categories", std::string{}));
        c.examples = resolve(base, j.value("examples", std::string{}));
        c.templates = resolve(base, j.value("templates", std::string{}));
        c.output_dir = resolve(base, j.value("output_dir", std::string(".")));
        c.node_class = j.value("node_class", c.node_class);
        c.strategy = j.value("strategy", c.strategy);
        c.seed = j.value("seed", c.seed);
        c.classify_batch_size = j.value("classify_batch_size", c.classify_batch_size);
        c.generate_batch_size = j.value("generate_batch_size", c.generate_batch_size);
        c.max_depth = j.value("max_depth", c.max_depth);
        c.passes = j.value("passes", c.passes);
        c.timestamp = j.value("timestamp", c.timestamp);
        if (j.contains("provider")) {
            const auto& p = j["provider"];
            reject_unknown_keys(p,
                                {"kind", "endpoint", "model_name", "api_key_env_var", "context_budget_tokens",
                                 "max_retries", "timeout_ms", "retry_backoff_ms", "record", "replay"},
                                "provider");
            c.provider = p.value("kind", c.provider);
            c.http.endpoint = p.value("endpoint", std::string{});
            c.http.model_name = p.value("model_name", std::string{});
            c.http.api_key_env_var = p.value("api_key_env_var", std::string{});
            c.http.context_budget_tokens = p.value("context_budget_tokens", c.http.context_budget_tokens);
            c.http.max_retries = p.value("max_retries", c.http.max_retries);
            c.http.timeout = std::chrono::milliseconds(p.value("timeout_ms", std::int64_t{60000}));
            c.http.retry_backoff = std::chrono::milliseconds(p.value("retry_backoff_ms", std::int64_t{500}));
            c.record = resolve(base, p.value("record", std::string{}));
            c.replay = resolve(base, p.value("replay", std::string{}));
        }
        if (j.contains("mock")) {
            const auto& m = j["mock"];
            reject_unknown_keys(m,
                                {"fixture", "noise_rate", "zero_shot_noise_rate", "seed", "corruption_mode",
                                 "fail_when_contains"},
                                "mock");
            c.mock.fixture = resolve(base, m.value("fixture", std::string{}));
            c.mock.noise_rate = m.value("noise_rate", 0.0);
            if (m.contains("zero_shot_noise_rate") && !m["zero_shot_noise_rate"].is_null())
                c.mock.zero_shot_noise_rate = m["zero_shot_noise_rate"].get<double>();
            c.mock.seed = m.value("seed", std::uint64_t{0});
            c.mock.corruption_mode = corruption_mode_from_string(m.value("corruption_mode", std::string("wrong_category")));
            c.mock.fail_when_contains = m.value("fail_when_contains", std::vector<std::string>{});
        }
        if (c.provider != "mock" && c.provider != "http" && c.provider != "replay")
            throw Error(ErrorCode::ConfigError, "provider kind must be mock, http or replay");
        if (c.strategy != "auto" && c.strategy != "one_shot" && c.strategy != "cyclical")
            throw Error(ErrorCode::ConfigError, "strategy must be auto, one_shot or cyclical");
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("config: ") + e.what());
    }
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "config file '" + path.string() + "' not readable");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, "config file '" + path.string() + "': " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

std::shared_ptr<CompletionProvider> make_pipeline_provider(const PipelineConfig& c) {
    std::shared_ptr<CompletionProvider> provider;
    if (c.provider == "mock") {
        if (c.mock.fixture.empty()) throw Error(ErrorCode::ConfigError, "the mock provider needs mock.fixture");
        MockOracleConfig m;
        m.fixture = std::make_shared<const Hierarchy>(read_snapshot_file(c.mock.fixture).hierarchy);
        m.noise_rate = c.mock.noise_rate;
        m.zero_shot_noise_rate = c.mock.zero_shot_noise_rate;
        m.seed = c.mock.seed;
        m.corruption_mode = c.mock.corruption_mode;
        m.fail_when_contains = c.mock.fail_when_contains;
        m.context_budget_tokens = c.http.context_budget_tokens;
        provider = std::make_shared<MockOracle>(std::move(m));
    } else if (c.provider == "replay") {
        provider = std::make_shared<ReplayProvider>(c.replay, c.http.context_budget_tokens);
    } else {
        const char* key = c.http.api_key_env_var.empty() ? nullptr : std::getenv(c.http.api_key_env_var.c_str());
        if (key == nullptr || *key == '\0')
            throw Error(ErrorCode::ConfigError, "API key variable '" + c.http.api_key_env_var +
                                                    "' is not set; set it or select the mock provider");
        provider = std::make_shared<HttpProvider>(c.http);
    }
    if (!c.record.empty()) provider = std::make_shared<RecordingProvider>(provider, c.record);
    return provider;
}

// Helpers --------------------------------------------------------------------

namespace {

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "'" + path.string() + "' not readable");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, "'" + path.string() + "': " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + path.string() + "'");
    out << text;
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) { write_text_file(path, j.dump(2) + "\n"); }

void write_snapshot(const std::filesystem::path& path, const GraphSnapshot& s) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    write_snapshot_file(path, s);
}

std::string slug(std::string_view s) {
    std::string out;
    for (char ch : s) out += std::isalnum(static_cast<unsigned char>(ch)) ? static_cast<char>(std::tolower(ch)) : '_';
    return out;
}

std::string percent(double f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * f);
    return buf;
}

std::string coverage_line(const CoverageReport& before, const CoverageReport& after) {
    return "coverage " + after.node_class + ": before " + std::to_string(before.in_hierarchy_after) + "/" +
           std::to_string(before.total_nodes) + " (" + percent(before.coverage_fraction) + ")  after " +
           std::to_string(after.in_hierarchy_after) + "/" + std::to_string(after.total_nodes) + " (" +
           percent(after.coverage_fraction) + ")";
}

struct Templates {
    std::optional<TemplateSet> owned;
    const TemplateSet* get() const { return owned ? &*owned : nullptr; }
};

Templates load_templates(const PipelineConfig& c) {
    Templates t;
    if (!c.templates.empty()) t.owned = TemplateSet::from_directory(c.templates);
    return t;
}

NodeId root_for_category(const Hierarchy& kg, const std::string& node_class, const std::string& category) {
    auto id = kg.find_by_label(node_class, category);
    if (!id || !kg.is_root(*id))
        throw Error(ErrorCode::ConfigError, "category '" + category + "' has no L1 root node in the snapshot");
    return *id;
}

/// Shared option block: a config file plus the overrides every stage uses.
struct CommonOptions {
    std::string config;
    std::string snapshot;
    std::string output_dir;
    std::string node_class;
    std::string timestamp;

    void add_to(CLI::App* app) {
        app->add_option("-c,--config", config, "Pipeline config (JSON)");
        app->add_option("--snapshot", snapshot, "Graph snapshot");
        app->add_option("--output-dir", output_dir, "Directory for stage outputs");
        app->add_option("--class", node_class, "Node class being organized");
        app->add_option("--timestamp", timestamp, "Timestamp recorded in provenance entries");
    }

    PipelineConfig resolve() const {
        PipelineConfig c = config.empty() ? PipelineConfig{} : load_config(config);
        if (!snapshot.empty()) c.snapshot = snapshot;
        if (!output_dir.empty()) c.output_dir = output_dir;
        if (!node_class.empty()) c.node_class = node_class;
        if (!timestamp.empty()) c.timestamp = timestamp;
        return c;
    }
};

GraphSnapshot require_snapshot(const PipelineConfig& c) {
    if (c.snapshot.empty()) throw Error(ErrorCode::ConfigError, "no snapshot given (--snapshot or config 'snapshot')");
    return read_snapshot_file(c.snapshot);
}

// classify -------------------------------------------------------------------

struct ClassifyArgs {
    CommonOptions common;
    std::string categories, examples, out;
    int passes = 0;
    std::int64_t seed = -1;
    bool zero_shot = false;
    bool all = false;
    double noise = -1;
};

int cmd_classify(const ClassifyArgs& a, std::ostream& out) {
    PipelineConfig c = a.common.resolve();
    if (!a.categories.empty()) c.categories = a.categories;
    if (!a.examples.empty()) c.examples = a.examples;
    if (a.passes > 0) c.passes = a.passes;
    if (a.seed >= 0) c.seed = static_cast<std::uint64_t>(a.seed);
    if (a.noise >= 0) c.mock.noise_rate = a.noise;
    if (c.categories.empty()) throw Error(ErrorCode::ConfigError, "no categories file given");

    const GraphSnapshot snap = require_snapshot(c);
    const CategorySet categories = load_category_file(c.categories, c.node_class);
    std::vector<FewShotExample> examples;
    if (!c.examples.empty()) examples = load_examples_file(c.examples);

    std::vector<Node> nodes;
    const auto levels = snap.hierarchy.levels();
    for (const Node& n : snap.hierarchy.nodes())
        if (n.node_class == c.node_class && !snap.hierarchy.is_root(n.id) && (a.all || !levels.contains(n.id)))
            nodes.push_back(n);

    std::vector<ClassificationResult> results;
    if (!nodes.empty()) {
        const auto provider = make_pipeline_provider(c);
        const Templates templates = load_templates(c);
        ClassifyOptions opts;
        opts.batch_size = c.classify_batch_size;
        opts.mode = a.zero_shot ? PromptMode::zero_shot : PromptMode::few_shot;
        opts.templates = templates.get();
        results = classify_all(nodes, categories, examples, *provider, c.passes, c.seed, opts);
    }

    const auto path = a.out.empty() ? c.output_dir / "classification.json" : std::filesystem::path(a.out);
    write_json_file(path, to_json(results));
    std::size_t other = 0, flagged = 0;
    for (const auto& r : results) {
        other += r.categories.contains(std::string(kOtherCategory)) ? 1 : 0;
        flagged += r.flagged ? 1 : 0;
    }
    out << "classified " << results.size() << " nodes (" << other << " Other, " << flagged << " flagged) -> "
        << path.string() << "\n";
    return kOk;
}

// generate -------------------------------------------------------------------

struct GenerateArgs {
    CommonOptions common;
    std::string categories, results, strategy;
    std::vector<std::string> only;
    int max_depth = 0;
    std::size_t batch = 0;
    double noise = -1;
    std::vector<std::string> fail_when;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
    PipelineConfig c = a.common.resolve();
    if (!a.categories.empty()) c.categories = a.categories;
    if (!a.strategy.empty()) c.strategy = a.strategy;
    if (a.max_depth > 0) c.max_depth = a.max_depth;
    if (a.batch > 0) c.generate_batch_size = a.batch;
    if (a.noise >= 0) c.mock.noise_rate = a.noise;
    for (const auto& f : a.fail_when) c.mock.fail_when_contains.push_back(f);
    if (c.strategy != "auto" && c.strategy != "one_shot" && c.strategy != "cyclical")
        throw Error(ErrorCode::ConfigError, "strategy must be auto, one_shot or cyclical");
    if (c.categories.empty()) throw Error(ErrorCode::ConfigError, "no categories file given");

    const GraphSnapshot snap = require_snapshot(c);
    const Hierarchy& kg = snap.hierarchy;
    const CategorySet categories = load_category_file(c.categories, c.node_class);
    const auto results_path = a.results.empty() ? c.output_dir / "classification.json" : std::filesystem::path(a.results);
    const auto results = classification_results_from_json(read_json_file(results_path));

    const auto provider = make_pipeline_provider(c);
    const Templates templates = load_templates(c);
    GeneratorOptions opts;
    opts.batch_size = c.generate_batch_size;
    opts.max_depth = c.max_depth;
    opts.templates = templates.get();

    std::size_t written = 0, failed = 0, total_candidates = 0, total_placed = 0, total_unplaced = 0;
    int first_error = kOk;
    for (std::size_t i = 0; i < categories.categories.size(); ++i) {
        const std::string& label = categories.categories[i];
        if (!a.only.empty() && std::find(a.only.begin(), a.only.end(), label) == a.only.end()) continue;
        const NodeId root = root_for_category(kg, c.node_class, label);
        const auto existing = kg.descendants(root);
        CandidateSet cs{root, {}};
        for (const auto& r : results)
            if (r.categories.contains(label) && r.node != root && !existing.contains(r.node)) cs.candidates.push_back(r.node);
        if (cs.candidates.empty()) continue;

        try {
            Strategy strategy;
            if (c.strategy == "cyclical") {
                strategy = Strategy::cyclical;
            } else {
                const StrategyChoice choice = select_strategy(kg, cs, provider->context_budget(), opts);
                if (c.strategy == "one_shot" && choice.strategy != Strategy::one_shot)
                    throw Error(ErrorCode::ContextOverflow, "one_shot forced but " + choice.reason);
                strategy = choice.strategy;
            }
            const HierarchyDelta delta = generate(strategy, kg, cs, *provider, opts);
            const auto path = c.output_dir / ("delta-" + std::to_string(i + 1) + "-" + slug(label) + ".json");
            write_json_file(path, to_json(delta));
            const std::size_t unplaced = delta.unplaced.size();
            const std::size_t placed = cs.candidates.size() - unplaced;
            total_candidates += cs.candidates.size();
            total_placed += placed;
            total_unplaced += unplaced;
            ++written;
            out << "category \"" << label << "\" strategy=" << to_string(delta.strategy_used)
                << " passes=" << delta.passes << " candidates=" << cs.candidates.size() << " placed=" << placed
                << " unplaced=" << unplaced << " rejected=" << delta.rejected_labels.size() << " -> " << path.string()
                << "\n";
        } catch (const Error& e) {
            ++failed;
            if (first_error == kOk) first_error = exit_code_for(e.code());
            err << "category \"" << label << "\" failed: " << to_string(e.code()) << ": " << e.what() << "\n";
            out << "category \"" << label << "\" FAILED (" << to_string(e.code()) << ")\n";
        }
    }
    out << "generated " << written << " deltas, " << failed << " failed; candidates=" << total_candidates
        << " placed=" << total_placed << " unplaced=" << total_unplaced << "\n";
    if (failed == 0) return kOk;
    return written > 0 ? kPartialFailure : first_error;
}

// merge ----------------------------------------------------------------------

struct MergeArgs {
    CommonOptions common;
    std::vector<std::string> deltas, corrections, subgraphs;
    std::string out;
};

int cmd_merge(const MergeArgs& a, std::ostream& out, std::ostream& err) {
    const PipelineConfig c = a.common.resolve();
    const GraphSnapshot base = require_snapshot(c);
    GraphSnapshot s = base;
    int status = kOk;
    auto fail = [&](const std::string& file, const Error& e) {
        err << file << ": " << to_string(e.code()) << ": " << e.what() << "\n";
        out << "rejected " << file << " (" << to_string(e.code()) << ")\n";
        if (status == kOk) status = exit_code_for(e.code());
    };

    for (const auto& file : a.subgraphs) {
        try {
            MergeReport report;
            s = commit_merge(s, read_snapshot_file(file).hierarchy, c.timestamp, &report);
            out << "merged " << file << ": " << report.inserted_nodes << " nodes inserted, " << report.unified.size()
                << " unified, " << report.inserted_edges << " edges inserted, " << report.dropped_edges.size()
                << " edges dropped\n";
            for (const auto& d : report.dropped_edges)
                err << file << ": dropped edge " << d.parent.str() << " -> " << d.child.str() << ": " << d.reason << "\n";
        } catch (const Error& e) {
            fail(file, e);
        }
    }
    for (const auto& file : a.deltas) {
        try {
            HierarchyDelta delta;
            try {
                delta = delta_from_json(read_json_file(file));
            } catch (const Error& e) {
                throw Error(e.code() == ErrorCode::ConfigError ? e.code() : ErrorCode::SchemaError,
                            "delta file '" + file + "': " + e.what());
            }
            s = commit_delta(s, delta, c.timestamp);
            out << "applied " << file << ": " << delta.edges_added.size() << " edges\n";
        } catch (const Error& e) {
            fail(file, e);
        }
    }
    for (const auto& file : a.corrections) {
        try {
            CorrectionReport report;
            s = commit_corrections(s, correction_set_from_json(read_json_file(file)), c.timestamp, &report);
            out << "applied " << file << ": " << report.applied() << " corrections, " << report.failed() << " rejected\n";
            for (const auto& o : report.outcomes)
                if (!o.applied) err << file << ": correction " << o.index << " on " << o.node.str() << ": " << o.message << "\n";
            if (report.failed() > 0 && status == kOk) status = kValidationError;
        } catch (const Error& e) {
            fail(file, e);
        }
    }

    const auto path = a.out.empty() ? c.output_dir / "merged.snapshot" : std::filesystem::path(a.out);
    write_snapshot(path, s);
    out << coverage_line(coverage_report(base.hierarchy, base.hierarchy, c.node_class),
                         coverage_report(s.hierarchy, s.hierarchy, c.node_class))
        << "\n";
    out << "wrote " << path.string() << "\n";
    return status;
}

// stats ----------------------------------------------------------------------

struct StatsArgs {
    CommonOptions common;
    std::string before, json;
    int collapse_at = 5;
};

int cmd_stats(const StatsArgs& a, std::ostream& out) {
    const PipelineConfig c = a.common.resolve();
    const GraphSnapshot after = require_snapshot(c);
    const GraphSnapshot before = a.before.empty() ? after : read_snapshot_file(a.before);
    const CoverageReport r = coverage_report(before.hierarchy, after.hierarchy, c.node_class);
    out << format_table(r, a.collapse_at);
    out << "coverage_fraction=" << percent(r.coverage_fraction) << " coverage_increase=" << percent(r.coverage_increase)
        << "\n";
    if (!a.json.empty()) {
        nlohmann::json j = to_json(r);
        j["per_level_histogram"] = to_json(collapse(r.per_level_counts, a.collapse_at));
        j["placement_histogram"] = to_json(collapse(r.placement_level_counts, a.collapse_at));
        write_json_file(a.json, j);
    }
    return kOk;
}

// review ---------------------------------------------------------------------

struct ReviewExportArgs {
    CommonOptions common;
    double rate = 0.1;
    std::uint64_t seed = 0;
    std::string reviewer, out;
};

int cmd_review_export(const ReviewExportArgs& a, std::ostream& out) {
    const PipelineConfig c = a.common.resolve();
    const GraphSnapshot s = require_snapshot(c);
    auto samples = sample_for_review(s.hierarchy, a.rate, a.seed);
    if (!a.reviewer.empty())
        for (auto& sample : samples) sample.assigned_reviewer = a.reviewer;
    const auto path = a.out.empty() ? c.output_dir / "review-samples.json" : std::filesystem::path(a.out);
    write_json_file(path, to_json(samples));
    std::size_t nodes = 0;
    for (const auto& sample : samples) nodes += sample.nodes.size();
    out << "exported " << samples.size() << " samples (" << nodes << " nodes) -> " << path.string() << "\n";
    return kOk;
}

struct ReviewApplyArgs {
    CommonOptions common;
    std::vector<std::string> corrections;
    std::string out;
};

int cmd_review_apply(const ReviewApplyArgs& a, std::ostream& out, std::ostream& err) {
    const PipelineConfig c = a.common.resolve();
    const GraphSnapshot base = require_snapshot(c);
    GraphSnapshot s = base;
    int status = kOk;
    for (const auto& file : a.corrections) {
        CorrectionReport report;
        s = commit_corrections(s, correction_set_from_json(read_json_file(file)), c.timestamp, &report);
        out << file << ": " << report.applied() << " applied, " << report.failed() << " rejected\n";
        for (const auto& o : report.outcomes)
            if (!o.applied) {
                err << file << ": correction " << o.index << " on " << o.node.str() << ": " << o.message << "\n";
                status = kValidationError;
            }
    }
    const auto path = a.out.empty() ? c.snapshot : std::filesystem::path(a.out);
    write_snapshot(path, s);
    out << "wrote " << path.string() << "\n";
    return status;
}

int cmd_review_summary(const std::string& samples_path, std::ostream& out) {
    const auto samples = review_samples_from_json(read_json_file(samples_path));
    const RelevanceSummary s = relevance_summary(samples);
    const auto f = s.overall.relevant_fraction();
    out << "relevant=" << s.overall.relevant << " misplaced=" << s.overall.misplaced << " unsure=" << s.overall.unsure
        << " relevant_fraction=" << (f ? percent(*f) : std::string("n/a")) << "\n";
    for (const auto& [cat, counts] : s.by_category) {
        const auto cf = counts.relevant_fraction();
        out << "  " << cat.str() << ": relevant=" << counts.relevant << " misplaced=" << counts.misplaced
            << " unsure=" << counts.unsure << " (" << (cf ? percent(*cf) : std::string("n/a")) << ")\n";
    }
    return kOk;
}

// experiment -----------------------------------------------------------------

struct ExperimentArgs {
    std::vector<double> eps{0.0, 0.05, 0.1, 0.2};
    int seeds = 20;
    std::size_t nodes = 200;
    int depth = 5;
    double multi_parent = 0.1;
    std::uint64_t fixture_seed = 1;
    std::size_t batch = 50;
    int permutations = 5;
    std::string corruption = "spurious_parent";
    std::string out;
};

int cmd_experiment(const ExperimentArgs& a, std::ostream& out) {
    ExperimentOptions o;
    o.noise_rates = a.eps;
    o.seeds = a.seeds;
    o.gold = fixtures::GoldOptions{a.nodes, a.depth, 1, a.multi_parent, a.fixture_seed, "intent"};
    o.generator.batch_size = a.batch;
    o.generator.max_depth = std::max(6, a.depth + 1);
    o.permutations = a.permutations;
    o.corruption = corruption_mode_from_string(a.corruption);
    const auto level = spdlog::get_level();
    spdlog::set_level(spdlog::level::err);  // noisy answers make many expected rejections
    const ExperimentReport r = run_noise_experiment(o);
    spdlog::set_level(level);
    out << format_tables(r);
    if (!a.out.empty()) write_json_file(a.out, to_json(r));
    return kOk;
}

// serve ----------------------------------------------------------------------

struct ServeArgs {
    CommonOptions common;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string staging, samples;
    bool live = false;
    double rate = 0.1;
    std::uint64_t seed = 0;
};

int cmd_serve(const ServeArgs& a) {
    const PipelineConfig c = a.common.resolve();
    GraphSnapshot s = require_snapshot(c);
    ServeOptions o;
    o.host = a.host;
    o.port = a.port;
    o.snapshot_path = c.snapshot;
    o.staging_dir = a.staging.empty() ? c.output_dir / "staged" : std::filesystem::path(a.staging);
    o.live_apply = a.live;
    o.node_class = c.node_class;
    o.sample_rate = a.rate;
    o.sample_seed = a.seed;
    o.timestamp = c.timestamp;
    std::vector<ReviewSample> samples;
    if (!a.samples.empty()) samples = review_samples_from_json(read_json_file(a.samples));
    ReviewService service(std::move(s), o, std::move(samples));
    serve(service, o);
    return kOk;
}

// fixture --------------------------------------------------------------------

struct FixtureArgs {
    std::string kind;
    std::string out_dir = ".";
    std::size_t nodes = 120;
    int depth = 4;
    std::size_t roots = 3;
    double multi_parent = 0.1;
    std::uint64_t seed = 1;
    int keep_level = 2;
};

GraphSnapshot as_snapshot(Hierarchy h) { return GraphSnapshot{std::move(h), {}}; }

int cmd_fixture(const FixtureArgs& a, std::ostream& out) {
    const std::filesystem::path dir(a.out_dir);
    std::filesystem::create_directories(dir);
    auto wrote = [&](const std::filesystem::path& p) { out << "wrote " << p.string() << "\n"; };

    if (a.kind == "intents-table1" || a.kind == "colors-table1") {
        auto fx = a.kind == "intents-table1" ? fixtures::make_intents_table1() : fixtures::make_colors_table1();
        const std::string stem = a.kind == "intents-table1" ? "intents" : "colors";
        write_snapshot(dir / (stem + "-before.snapshot"), as_snapshot(std::move(fx.before)));
        write_snapshot(dir / (stem + "-after.snapshot"), as_snapshot(std::move(fx.after)));
        wrote(dir / (stem + "-before.snapshot"));
        wrote(dir / (stem + "-after.snapshot"));
        return kOk;
    }
    if (a.kind == "gold") {
        const Hierarchy gold =
            fixtures::make_gold_taxonomy({a.nodes, a.depth, a.roots, a.multi_parent, a.seed, "intent"});
        write_snapshot(dir / "gold.snapshot", as_snapshot(gold));
        wrote(dir / "gold.snapshot");
        return kOk;
    }
    if (a.kind == "pipeline") {
        const Hierarchy gold =
            fixtures::make_gold_taxonomy({a.nodes, a.depth, a.roots, a.multi_parent, a.seed, "intent"});
        const Hierarchy kg = fixtures::strip_to_level(gold, a.keep_level);
        write_snapshot(dir / "gold.snapshot", as_snapshot(gold));
        write_snapshot(dir / "kg.snapshot", as_snapshot(kg));

        std::string cats;
        nlohmann::json examples = nlohmann::json::array();
        for (const NodeId& r : gold.roots()) {
            cats += gold.node(r).label + "\n";
            const auto children = gold.children(r);
            for (std::size_t i = 0; i < children.size() && i < 2; ++i)
                examples.push_back({{"label", gold.node(children[i]).label}, {"categories", {gold.node(r).label}}});
        }
        examples.push_back({{"label", "black hole"}, {"categories", {std::string(kOtherCategory)}}});
        write_text_file(dir / "categories.txt", cats);
        write_json_file(dir / "examples.json", examples);
        write_json_file(dir / "config.json", {{"snapshot", "kg.snapshot"},
                                              {"categories", "categories.txt"},
                                              {"examples", "examples.json"},
                                              {"output_dir", "out"},
                                              {"node_class", "intent"},
                                              {"provider", {{"kind", "mock"}}},
                                              {"mock", {{"fixture", "gold.snapshot"}, {"noise_rate", 0.0}, {"seed", 0}}},
                                              {"strategy", "auto"},
                                              {"seed", 0},
                                              {"passes", 1}});
        for (auto name : {"gold.snapshot", "kg.snapshot", "categories.txt", "examples.json", "config.json"})
            wrote(dir / name);
        return kOk;
    }
    throw Error(ErrorCode::ConfigError, "unknown fixture kind '" + a.kind +
                                            "' (intents-table1, colors-table1, gold, pipeline)");
}

// import / validate ----------------------------------------------------------

struct ImportArgs {
    CommonOptions common;
    std::string csv, out;
    std::vector<std::string> roots;
};

int cmd_import(const ImportArgs& a, std::ostream& out) {
    const PipelineConfig c = a.common.resolve();
    GraphSnapshot s;
    if (!c.snapshot.empty() && std::filesystem::exists(c.snapshot)) s = read_snapshot_file(c.snapshot);
    else s.hierarchy.set_class_filter(c.node_class);
    std::ifstream in(a.csv);
    if (!in) throw Error(ErrorCode::ConfigError, "CSV file '" + a.csv + "' not readable");
    const auto nodes = read_nodes_csv(in);
    s = commit_import(s, nodes, c.timestamp);
    for (const auto& r : a.roots) s.hierarchy.add_root(NodeId(r));
    const auto path = a.out.empty() ? c.snapshot : std::filesystem::path(a.out);
    if (path.empty()) throw Error(ErrorCode::ConfigError, "no output snapshot given (--out)");
    write_snapshot(path, s);
    out << "imported " << nodes.size() << " nodes -> " << path.string() << "\n";
    return kOk;
}

int cmd_validate(const CommonOptions& common, std::ostream& out) {
    const PipelineConfig c = common.resolve();
    const GraphSnapshot s = require_snapshot(c);
    out << c.snapshot.string() << ": " << s.hierarchy.node_count() << " nodes, " << s.hierarchy.edge_count()
        << " edges, " << s.hierarchy.roots().size() << " L1 roots, " << s.provenance_log.size()
        << " provenance entries; valid\n";
    return kOk;
}

void configure_logging(bool verbose, bool quiet) {
    static bool installed = false;
    if (!installed) {
        auto logger = spdlog::stderr_color_mt("hiergen");
        logger->set_pattern("%^%l%$: %v");
        spdlog::set_default_logger(logger);
        installed = true;
    }
    spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::err : spdlog::level::warn);
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"hiergen: hierarchy generation for knowledge graphs"};
    app.require_subcommand(1);
    bool verbose = false, quiet = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    app.add_flag("-q,--quiet", quiet, "Errors only");

    ClassifyArgs classify;
    auto* c_classify = app.add_subcommand("classify", "Assign unplaced nodes to L1 categories");
    classify.common.add_to(c_classify);
    c_classify->add_option("--categories", classify.categories, "Category file, one per line");
    c_classify->add_option("--examples", classify.examples, "Few-shot examples (JSON)");
    c_classify->add_option("-o,--out", classify.out, "Results file");
    c_classify->add_option("--passes", classify.passes, "Shuffled consensus passes");
    c_classify->add_option("--seed", classify.seed, "Shuffle seed");
    c_classify->add_option("--noise", classify.noise, "Mock noise rate override");
    c_classify->add_flag("--zero-shot", classify.zero_shot, "Send no examples");
    c_classify->add_flag("--all", classify.all, "Also classify nodes already in the hierarchy");

    GenerateArgs generate;
    auto* c_generate = app.add_subcommand("generate", "Generate one hierarchy delta per L1 category");
    generate.common.add_to(c_generate);
    c_generate->add_option("--categories", generate.categories, "Category file");
    c_generate->add_option("--results", generate.results, "Classification results");
    c_generate->add_option("--strategy", generate.strategy, "auto | one_shot | cyclical");
    c_generate->add_option("--category", generate.only, "Restrict to these categories");
    c_generate->add_option("--max-depth", generate.max_depth, "Cyclical depth limit");
    c_generate->add_option("--batch-size", generate.batch, "One-shot batch size");
    c_generate->add_option("--noise", generate.noise, "Mock noise rate override");
    c_generate->add_option("--fail-when", generate.fail_when, "Mock: fail requests containing this text");

    MergeArgs merge;
    auto* c_merge = app.add_subcommand("merge", "Apply deltas, corrections and domain subgraphs");
    merge.common.add_to(c_merge);
    c_merge->add_option("--delta", merge.deltas, "Delta files");
    c_merge->add_option("--corrections", merge.corrections, "Correction set files");
    c_merge->add_option("--subgraph", merge.subgraphs, "Domain subgraph snapshots to merge");
    c_merge->add_option("-o,--out", merge.out, "Output snapshot");

    StatsArgs stats;
    auto* c_stats = app.add_subcommand("stats", "Coverage and per-level counts");
    stats.common.add_to(c_stats);
    c_stats->add_option("--before", stats.before, "Snapshot before augmentation");
    c_stats->add_option("--json", stats.json, "Write the report as JSON");
    c_stats->add_option("--collapse-at", stats.collapse_at, "First level of the merged deepest bucket");

    ReviewExportArgs rexport;
    auto* c_rexport = app.add_subcommand("review-export", "Sample subtrees for human review");
    rexport.common.add_to(c_rexport);
    c_rexport->add_option("--rate", rexport.rate, "Sampling rate in (0, 1]");
    c_rexport->add_option("--seed", rexport.seed, "Sampling seed");
    c_rexport->add_option("--reviewer", rexport.reviewer, "Reviewer assigned to every sample");
    c_rexport->add_option("-o,--out", rexport.out, "Samples file");

    ReviewApplyArgs rapply;
    auto* c_rapply = app.add_subcommand("review-apply", "Apply reviewer correction sets");
    rapply.common.add_to(c_rapply);
    c_rapply->add_option("--corrections", rapply.corrections, "Correction set files")->required();
    c_rapply->add_option("-o,--out", rapply.out, "Output snapshot (default: rewrite --snapshot)");

    std::string summary_samples;
    auto* c_summary = app.add_subcommand("review-summary", "Relevance of reviewed samples");
    c_summary->add_option("--samples", summary_samples, "Samples file with outcomes")->required();

    ExperimentArgs experiment;
    auto* c_experiment = app.add_subcommand("experiment", "Noise sweep comparing both strategies");
    c_experiment->add_option("--eps", experiment.eps, "Noise rates")->delimiter(',');
    c_experiment->add_option("--seeds", experiment.seeds, "Seeds per noise rate");
    c_experiment->add_option("--nodes", experiment.nodes, "Gold taxonomy size");
    c_experiment->add_option("--depth", experiment.depth, "Gold taxonomy depth");
    c_experiment->add_option("--multi-parent", experiment.multi_parent, "Second-parent rate");
    c_experiment->add_option("--fixture-seed", experiment.fixture_seed, "Gold taxonomy seed");
    c_experiment->add_option("--batch-size", experiment.batch, "One-shot batch size");
    c_experiment->add_option("--permutations", experiment.permutations, "Order shuffles per run");
    c_experiment->add_option("--corruption", experiment.corruption, "wrong_category | spurious_parent | drop_node");
    c_experiment->add_option("-o,--out", experiment.out, "Write the report as JSON");

    ServeArgs serve_args;
    auto* c_serve = app.add_subcommand("serve", "Local review service");
    serve_args.common.add_to(c_serve);
    c_serve->add_option("--host", serve_args.host, "Bind address");
    c_serve->add_option("--port", serve_args.port, "Port");
    c_serve->add_option("--staging-dir", serve_args.staging, "Where staged corrections go");
    c_serve->add_option("--samples", serve_args.samples, "Review samples to serve");
    c_serve->add_option("--rate", serve_args.rate, "Sampling rate when no samples file is given");
    c_serve->add_option("--seed", serve_args.seed, "Sampling seed");
    c_serve->add_flag("--live", serve_args.live, "Apply corrections to the snapshot immediately");

    FixtureArgs fixture;
    auto* c_fixture = app.add_subcommand("fixture", "Write a built-in fixture");
    c_fixture->add_option("kind", fixture.kind, "intents-table1 | colors-table1 | gold | pipeline")->required();
    c_fixture->add_option("--out-dir", fixture.out_dir, "Output directory");
    c_fixture->add_option("--nodes", fixture.nodes, "Gold taxonomy size");
    c_fixture->add_option("--depth", fixture.depth, "Gold taxonomy depth");
    c_fixture->add_option("--roots", fixture.roots, "Number of L1 roots");
    c_fixture->add_option("--multi-parent", fixture.multi_parent, "Second-parent rate");
    c_fixture->add_option("--seed", fixture.seed, "Fixture seed");
    c_fixture->add_option("--keep-level", fixture.keep_level, "Deepest level kept in the pipeline KG");

    ImportArgs import_args;
    auto* c_import = app.add_subcommand("import", "Import nodes from CSV");
    import_args.common.add_to(c_import);
    c_import->add_option("--csv", import_args.csv, "id,label,class[,attr...] file")->required();
    c_import->add_option("--root", import_args.roots, "Mark node ids as L1 roots");
    c_import->add_option("-o,--out", import_args.out, "Output snapshot");

    CommonOptions validate;
    auto* c_validate = app.add_subcommand("validate", "Load and check a snapshot");
    validate.add_to(c_validate);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kOk : kUsage;
    }
    configure_logging(verbose, quiet);

    try {
        if (*c_classify) return cmd_classify(classify, out);
        if (*c_generate) return cmd_generate(generate, out, err);
        if (*c_merge) return cmd_merge(merge, out, err);
        if (*c_stats) return cmd_stats(stats, out);
        if (*c_rexport) return cmd_review_export(rexport, out);
        if (*c_rapply) return cmd_review_apply(rapply, out, err);
        if (*c_summary) return cmd_review_summary(summary_samples, out);
        if (*c_experiment) return cmd_experiment(experiment, out);
        if (*c_serve) return cmd_serve(serve_args);
        if (*c_fixture) return cmd_fixture(fixture, out);
        if (*c_import) return cmd_import(import_args, out);
        if (*c_validate) return cmd_validate(validate, out);
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }
    return kUsage;
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr); }

} // namespace hiergen::cli
