// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#pragma once

#include "hiergen/ingest.hpp"
#include "hiergen/mock_oracle.hpp"
#include "hiergen/provider.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hiergen::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kConfigError = 2,
    kProviderError = 3,
    kPartialFailure = 4,
    kValidationError = 5,
};

/// Maps a library error to its documented exit code.
int exit_code_for(ErrorCode code) noexcept;

struct MockSettings {
    std::filesystem::path fixture;  // gold snapshot
    double noise_rate = 0.0;
    std::optional<double> zero_shot_noise_rate;
    std::uint64_t seed = 0;
    CorruptionMode corruption_mode = CorruptionMode::wrong_category;
    std::vector<std::string> fail_when_contains;
};

struct PipelineConfig {
    std::filesystem::path snapshot;
    std::filesystem::path categories;
    std::filesystem::path examples;
    std::filesystem::path templates;  // builtin templates when empty
    std::filesystem::path output_dir = ".";
    std::string node_class = "intent";

    std::string provider = "mock";  // "mock" | "http" | "replay"
    ProviderConfig http;
    std::filesystem::path record;   // replay file written by live calls
    std::filesystem::path replay;   // replay file read by the replay provider
    MockSettings mock;

    std::string strategy = "auto";  // "auto" | "one_shot" | "cyclical"
    std::uint64_t seed = 0;
    std::size_t classify_batch_size = 20;
    std::size_t generate_batch_size = 50;
    int max_depth = 6;
    int passes = 1;
    std::string timestamp = std::string(kDefaultTimestamp);
};

/// Relative paths inside the file resolve against the file's directory.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Builds the configured provider. A real provider needs its API key
/// variable to be set; otherwise the mock must be selected.
std::shared_ptr<CompletionProvider> make_pipeline_provider(const PipelineConfig& config);

/// Runs one command line. `args[0]` is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

} // namespace hiergen::cli
