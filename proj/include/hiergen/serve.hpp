// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#pragma once

#include "hiergen/evalstats.hpp"
#include "hiergen/ingest.hpp"

#include "json.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace httplib {
class Server;
}

namespace hiergen {

struct ServeOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path snapshot_path;  // rewritten on live applies
    std::filesystem::path staging_dir;    // staged correction sets and outcomes
    bool live_apply = false;              // default: stage corrections for `review-apply`
    std::string node_class;               // for /stats; the snapshot's class filter when empty
    double sample_rate = 0.1;
    std::uint64_t sample_seed = 0;
    std::string timestamp = std::string(kDefaultTimestamp);
    std::chrono::milliseconds writer_wait{2000};
};

/// The read/correct API behind the review UI.
///
/// Readers take a reference-counted immutable state, so a live apply that
/// swaps in a new state never changes what an in-flight reader sees. A
/// single writer lock serializes corrections and outcome uploads.
class ReviewService {
public:
    struct Reply {
        int status = 200;
        nlohmann::json body;
    };

    ReviewService(GraphSnapshot snapshot, ServeOptions options, std::vector<ReviewSample> samples = {});

    Reply get_hierarchy(const std::string& l1) const;
    Reply get_node(const std::string& id) const;
    Reply get_stats() const;
    Reply get_samples() const;
    Reply post_corrections(const std::string& body);
    Reply post_outcomes(const std::string& body);

    std::shared_ptr<const GraphSnapshot> snapshot() const;

    /// Registers every route on `server`.
    void mount(httplib::Server& server);

private:
    struct State {
        GraphSnapshot snapshot;
        std::vector<ReviewSample> samples;
    };

    std::shared_ptr<const State> state() const;
    void publish(std::shared_ptr<const State> next);
    std::string node_class() const;

    ServeOptions options_;
    Hierarchy baseline_;  // coverage "before"
    mutable std::mutex state_mutex_;
    std::shared_ptr<const State> state_;
    std::timed_mutex writer_;
    std::uint64_t staged_ = 0;
};

/// Binds and blocks until the server stops. Throws ConfigError when the
/// address cannot be bound.
void serve(ReviewService& service, const ServeOptions& options);

} // namespace hiergen
