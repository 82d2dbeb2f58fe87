// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#pragma once

#include "hiergen/kg.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace hiergen {

enum class TaskKind { classify, place, correct, level, route, review, evaluate };

std::string_view to_string(TaskKind kind) noexcept;
std::optional<TaskKind> task_kind_from_string(std::string_view s) noexcept;

struct PromptTemplate {
    std::string system;
    std::string user;
};

/// Splits a template file into its `[system]` and `[user]` parts.
PromptTemplate parse_template(std::string_view text);

/// Substitutes `{name}` placeholders. Braces that do not enclose a known
/// placeholder name are copied through untouched, so JSON snippets in a
/// template need no escaping.
std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& values);

/// The versioned prompt set. Builtins are compiled from templates/; a
/// directory override replaces individual tasks file by file.
class TemplateSet {
public:
    static TemplateSet builtin();
    /// Shared, lazily built copy of `builtin()`.
    static const TemplateSet& defaults();
    static TemplateSet from_directory(const std::filesystem::path& dir);

    const PromptTemplate& at(TaskKind kind) const { return templates_.at(kind); }
    const std::string& version() const noexcept { return version_; }

private:
    std::map<TaskKind, PromptTemplate> templates_;
    std::string version_;
};

/// Payload sections as laid out by the templates: a `### task: <kind>`
/// line followed by `### <name>` headed blocks.
struct PromptSections {
    std::optional<TaskKind> kind;
    std::map<std::string, std::string> sections;

    /// Parses the named section as JSON; throws SchemaError if absent or malformed.
    nlohmann::json json(const std::string& name) const;
};

PromptSections parse_sections(std::string_view payload);

using ChildrenOf = std::function<std::vector<std::string>(const std::string&)>;

/// Renders a label forest as nested objects: {"A": {"b": {}}}. A node
/// reached through several parents appears under each; edges leading back
/// onto the current path are skipped.
nlohmann::json nest_labels(std::span<const std::string> tops, const ChildrenOf& children_of);

/// Nested label rendering of `h` starting from its L1 roots (or `tops`).
nlohmann::json nest_hierarchy(const Hierarchy& h);
nlohmann::json nest_hierarchy(const Hierarchy& h, std::span<const NodeId> tops);

} // namespace hiergen
