// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "hiergen/prompts.hpp"

#include "hiergen/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

namespace hiergen {

namespace {

#include "builtin_templates.inc"

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

constexpr std::pair<TaskKind, std::string_view> kTaskNames[] = {
    {TaskKind::classify, "classify"}, {TaskKind::place, "place"},   {TaskKind::correct, "correct"},
    {TaskKind::level, "level"},       {TaskKind::route, "route"},   {TaskKind::review, "review"},
    {TaskKind::evaluate, "evaluate"},
};

} // namespace

std::string_view to_string(TaskKind kind) noexcept {
    for (const auto& [k, name] : kTaskNames)
        if (k == kind) return name;
    return "classify";
}

std::optional<TaskKind> task_kind_from_string(std::string_view s) noexcept {
    for (const auto& [k, name] : kTaskNames)
        if (name == s) return k;
    return std::nullopt;
}

PromptTemplate parse_template(std::string_view text) {
    PromptTemplate out;
    std::string* target = nullptr;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t == "[system]") {
            target = &out.system;
            continue;
        }
        if (t == "[user]") {
            target = &out.user;
            continue;
        }
        if (target == nullptr) {
            if (!t.empty()) throw Error(ErrorCode::SchemaError, "template text before [system]/[user] header");
            continue;
        }
        target->append(line);
        target->push_back('\n');
    }
    out.system = std::string(trim(out.system));
    out.user = std::string(trim(out.user));
    if (out.system.empty() || out.user.empty())
        throw Error(ErrorCode::SchemaError, "template needs non-empty [system] and [user] parts");
    return out;
}

std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

TemplateSet TemplateSet::builtin() {
    TemplateSet set;
    set.version_ = std::string(kTemplateSetVersion);
    for (const auto& [name, body] : kBuiltinTemplates) {
        if (auto kind = task_kind_from_string(name)) set.templates_[*kind] = parse_template(body);
    }
    for (const auto& [kind, name] : kTaskNames)
        if (!set.templates_.contains(kind))
            throw Error(ErrorCode::SchemaError, "builtin template '" + std::string(name) + "' missing");
    return set;
}

const TemplateSet& TemplateSet::defaults() {
    static const TemplateSet set = builtin();
    return set;
}

TemplateSet TemplateSet::from_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw Error(ErrorCode::ConfigError, "template directory '" + dir.string() + "' not found");
    TemplateSet set = builtin();
    for (const auto& [kind, name] : kTaskNames) {
        const auto file = dir / (std::string(name) + ".txt");
        if (!std::filesystem::exists(file)) continue;
        std::ifstream in(file);
        std::stringstream buf;
        buf << in.rdbuf();
        set.templates_[kind] = parse_template(buf.str());
    }
    if (std::ifstream v(dir / "VERSION"); v) {
        std::string version;
        std::getline(v, version);
        set.version_ = std::string(trim(version));
    }
    return set;
}

nlohmann::json PromptSections::json(const std::string& name) const {
    auto it = sections.find(name);
    if (it == sections.end()) throw Error(ErrorCode::SchemaError, "prompt has no '" + name + "' section");
    auto parsed = nlohmann::json::parse(it->second, nullptr, false);
    if (parsed.is_discarded())
        throw Error(ErrorCode::SchemaError, "prompt section '" + name + "' is not JSON");
    return parsed;
}

PromptSections parse_sections(std::string_view payload) {
    PromptSections out;
    std::istringstream in{std::string(payload)};
    std::string line;
    std::string* current = nullptr;
    while (std::getline(in, line)) {
        if (line.rfind("### ", 0) == 0) {
            const auto header = trim(std::string_view(line).substr(4));
            if (header.rfind("task:", 0) == 0) {
                out.kind = task_kind_from_string(trim(header.substr(5)));
                current = nullptr;
                continue;
            }
            current = &out.sections[std::string(header)];
            current->clear();
            continue;
        }
        if (current != nullptr) {
            current->append(line);
            current->push_back('\n');
        }
    }
    return out;
}

namespace {

nlohmann::json nest_from(const std::string& label, const ChildrenOf& children_of, std::set<std::string>& path) {
    nlohmann::json obj = nlohmann::json::object();
    path.insert(label);
    for (const std::string& c : children_of(label)) {
        if (path.contains(c)) continue;
        obj[c] = nest_from(c, children_of, path);
    }
    path.erase(label);
    return obj;
}

} // namespace

nlohmann::json nest_labels(std::span<const std::string> tops, const ChildrenOf& children_of) {
    nlohmann::json out = nlohmann::json::object();
    std::set<std::string> path;
    for (const std::string& t : tops) out[t] = nest_from(t, children_of, path);
    return out;
}

nlohmann::json nest_hierarchy(const Hierarchy& h) { return nest_hierarchy(h, h.roots()); }

nlohmann::json nest_hierarchy(const Hierarchy& h, std::span<const NodeId> tops) {
    std::unordered_map<std::string, std::vector<std::string>> kids;
    for (const Edge& e : h.edges()) kids[h.node(e.parent).label].push_back(h.node(e.child).label);
    std::vector<std::string> top_labels;
    for (const NodeId& id : tops) top_labels.push_back(h.node(id).label);
    return nest_labels(top_labels, [&](const std::string& label) {
        auto it = kids.find(label);
        return it == kids.end() ? std::vector<std::string>{} : it->second;
    });
}

} // namespace hiergen
