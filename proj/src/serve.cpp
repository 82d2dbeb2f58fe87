// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "hiergen/serve.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>

namespace hiergen {

namespace {

ReviewService::Reply error_reply(int status, std::string_view code, std::string message) {
    return {status, {{"error", code}, {"message", std::move(message)}}};
}

ReviewService::Reply error_reply(int status, const Error& e) { return error_reply(status, to_string(e.code()), e.what()); }

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + tmp.string() + "'");
        out << j.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

} // namespace

ReviewService::ReviewService(GraphSnapshot snapshot, ServeOptions options, std::vector<ReviewSample> samples)
    : options_(std::move(options)), baseline_(snapshot.hierarchy) {
    if (samples.empty()) samples = sample_for_review(snapshot.hierarchy, options_.sample_rate, options_.sample_seed);
    state_ = std::make_shared<const State>(State{std::move(snapshot), std::move(samples)});
}

std::shared_ptr<const ReviewService::State> ReviewService::state() const {
    std::lock_guard lock(state_mutex_);
    return state_;
}

void ReviewService::publish(std::shared_ptr<const State> next) {
    std::lock_guard lock(state_mutex_);
    state_ = std::move(next);
}

std::shared_ptr<const GraphSnapshot> ReviewService::snapshot() const {
    auto s = state();
    return {s, &s->snapshot};
}

std::string ReviewService::node_class() const {
    if (!options_.node_class.empty()) return options_.node_class;
    if (!baseline_.class_filter().empty()) return baseline_.class_filter();
    return baseline_.classes().empty() ? std::string{} : *baseline_.classes().begin();
}

ReviewService::Reply ReviewService::get_hierarchy(const std::string& l1) const {
    const auto s = state();
    const Hierarchy& h = s->snapshot.hierarchy;
    std::optional<NodeId> root;
    if (h.contains(NodeId(l1)) && h.is_root(NodeId(l1))) root = NodeId(l1);
    for (const NodeId& r : h.roots())
        if (!root && h.node(r).normalized_label() == normalize_label(l1)) root = r;
    if (!root) return error_reply(404, "UnknownNode", "no L1 category '" + l1 + "'");
    return {200, to_json(h.subgraph(*root))};
}

ReviewService::Reply ReviewService::get_node(const std::string& id) const {
    const auto s = state();
    const Hierarchy& h = s->snapshot.hierarchy;
    const Node* n = h.find(NodeId(id));
    if (n == nullptr) return error_reply(404, "UnknownNode", "no node '" + id + "'");
    auto ids = [](const std::vector<NodeId>& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (const NodeId& x : v) arr.push_back(x.str());
        return arr;
    };
    const auto level = h.level_of(n->id);
    return {200,
            {{"id", n->id.str()},
             {"label", n->label},
             {"class", n->node_class},
             {"attributes", n->attributes},
             {"level", level ? nlohmann::json(*level) : nlohmann::json(nullptr)},
             {"parents", ids(h.parents(n->id))},
             {"children", ids(h.children(n->id))}}};
}

ReviewService::Reply ReviewService::get_stats() const {
    const auto s = state();
    try {
        return {200, to_json(coverage_report(baseline_, s->snapshot.hierarchy, node_class()))};
    } catch (const Error& e) {
        return error_reply(500, e);
    }
}

ReviewService::Reply ReviewService::get_samples() const { return {200, to_json(state()->samples)}; }

ReviewService::Reply ReviewService::post_corrections(const std::string& body) {
    CorrectionSet corrections;
    try {
        corrections = correction_set_from_json(nlohmann::json::parse(body));
    } catch (const nlohmann::json::exception& e) {
        return error_reply(400, "SchemaError", e.what());
    } catch (const Error& e) {
        return error_reply(400, e);
    }
    if (corrections.corrections.empty()) return error_reply(400, "SchemaError", "empty correction set");

    std::unique_lock lock(writer_, std::defer_lock);
    if (!lock.try_lock_for(options_.writer_wait)) return error_reply(503, "Busy", "another apply holds the snapshot lock");

    const auto current = state();
    CorrectionReport report;
    GraphSnapshot next = commit_corrections(current->snapshot, corrections, options_.timestamp, &report);
    if (report.failed() > 0) {
        nlohmann::json j = to_json(report);
        j["error"] = "CorrectionRejected";
        return {422, std::move(j)};
    }

    ++staged_;
    nlohmann::json receipt = {{"receipt", staged_}, {"applied", report.applied()}};
    try {
        if (options_.live_apply) {
            if (!options_.snapshot_path.empty()) write_snapshot_file(options_.snapshot_path, next);
            publish(std::make_shared<const State>(State{std::move(next), current->samples}));
            receipt["mode"] = "live";
        } else {
            std::filesystem::create_directories(options_.staging_dir);
            const auto path = options_.staging_dir / ("corrections-" + std::to_string(staged_) + ".json");
            write_json_file(path, to_json(corrections));
            receipt["mode"] = "staged";
            receipt["path"] = path.string();
        }
    } catch (const std::exception& e) {
        return error_reply(500, "WriteFailed", e.what());
    }
    return {200, std::move(receipt)};
}

ReviewService::Reply ReviewService::post_outcomes(const std::string& body) {
    std::vector<ReviewSample> incoming;
    try {
        incoming = review_samples_from_json(nlohmann::json::parse(body));
    } catch (const nlohmann::json::exception& e) {
        return error_reply(400, "SchemaError", e.what());
    } catch (const Error& e) {
        return error_reply(400, e);
    }

    std::unique_lock lock(writer_, std::defer_lock);
    if (!lock.try_lock_for(options_.writer_wait)) return error_reply(503, "Busy", "another apply holds the snapshot lock");
    const auto current = state();
    const Hierarchy& h = current->snapshot.hierarchy;
    auto samples = current->samples;
    for (const auto& in : incoming) {
        for (const auto& [node, outcome] : in.outcomes)
            if (!h.contains(node)) return error_reply(422, "UnknownNode", "outcome for unknown node '" + node.str() + "'");
        auto it = std::find_if(samples.begin(), samples.end(),
                               [&](const ReviewSample& s) { return s.subtree_root == in.subtree_root; });
        if (it == samples.end()) {
            samples.push_back(in);
            continue;
        }
        if (in.assigned_reviewer) it->assigned_reviewer = in.assigned_reviewer;
        for (const auto& [node, outcome] : in.outcomes) {
            if (std::find(it->nodes.begin(), it->nodes.end(), node) == it->nodes.end()) it->nodes.push_back(node);
            it->outcomes[node] = outcome;
        }
        std::sort(it->nodes.begin(), it->nodes.end());
    }
    try {
        if (!options_.staging_dir.empty()) {
            std::filesystem::create_directories(options_.staging_dir);
            write_json_file(options_.staging_dir / "outcomes.json", to_json(samples));
        }
    } catch (const std::exception& e) {
        return error_reply(500, "WriteFailed", e.what());
    }
    nlohmann::json summary;
    try {
        summary = to_json(relevance_summary(samples));
    } catch (const Error&) {
        summary = nullptr;
    }
    publish(std::make_shared<const State>(State{current->snapshot, std::move(samples)}));
    return {200, {{"summary", std::move(summary)}}};
}

void ReviewService::mount(httplib::Server& server) {
    auto send = [](httplib::Response& res, const Reply& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server.Get(R"(/hierarchy/(.+))", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, get_hierarchy(req.matches[1]));
    });
    server.Get(R"(/node/(.+))", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, get_node(req.matches[1]));
    });
    server.Get("/stats", [this, send](const httplib::Request&, httplib::Response& res) { send(res, get_stats()); });
    server.Get("/samples", [this, send](const httplib::Request&, httplib::Response& res) { send(res, get_samples()); });
    server.Post("/corrections", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, post_corrections(req.body));
    });
    server.Post("/outcomes", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, post_outcomes(req.body));
    });
}

void serve(ReviewService& service, const ServeOptions& options) {
    httplib::Server server;
    // httplib's default adds SO_REUSEPORT, which would let a second service
    // silently share the port; a busy port must be an error instead.
    server.set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    service.mount(server);
    if (!server.bind_to_port(options.host, options.port))
        throw Error(ErrorCode::ConfigError,
                    "cannot bind " + options.host + ":" + std::to_string(options.port) + " (port in use?)");
    spdlog::info("review service listening on http://{}:{}", options.host, options.port);
    server.listen_after_bind();
}

} // namespace hiergen
