// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "hiergen/ingest.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

namespace hiergen {

namespace {

NodeId id_at(const nlohmann::json& j, const char* key) { return NodeId(j.at(key).get<std::string>()); }

std::set<NodeId> id_set(const nlohmann::json& j) {
    std::set<NodeId> out;
    for (const auto& v : j) out.insert(NodeId(v.get<std::string>()));
    return out;
}

nlohmann::json id_list(const std::set<NodeId>& ids) {
    nlohmann::json arr = nlohmann::json::array();
    for (const NodeId& id : ids) arr.push_back(id.str());
    return arr;
}

template <class F>
auto schema_guard(std::string_view what, F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string(what) + ": " + e.what());
    }
}

} // namespace

// Corrections ----------------------------------------------------------------

nlohmann::json to_json(const CorrectionSet& cs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Correction& c : cs.corrections)
        arr.push_back({{"node", c.node.str()},
                       {"remove_parents", id_list(c.remove_parents)},
                       {"add_parents", id_list(c.add_parents)},
                       {"reviewer", c.reviewer},
                       {"timestamp", c.timestamp}});
    return {{"format_version", 1}, {"corrections", std::move(arr)}};
}

CorrectionSet correction_set_from_json(const nlohmann::json& j) {
    return schema_guard("correction set", [&] {
        if (j.contains("format_version") && j.at("format_version").get<int>() != 1)
            throw Error(ErrorCode::UnsupportedVersion, "correction set format_version " + j.at("format_version").dump());
        CorrectionSet cs;
        for (const auto& item : j.at("corrections")) {
            Correction c;
            c.node = id_at(item, "node");
            c.remove_parents = id_set(item.value("remove_parents", nlohmann::json::array()));
            c.add_parents = id_set(item.value("add_parents", nlohmann::json::array()));
            c.reviewer = item.value("reviewer", std::string{});
            c.timestamp = item.value("timestamp", std::string{});
            cs.corrections.push_back(std::move(c));
        }
        return cs;
    });
}

std::size_t CorrectionReport::applied() const {
    return static_cast<std::size_t>(
        std::count_if(outcomes.begin(), outcomes.end(), [](const CorrectionOutcome& o) { return o.applied; }));
}

nlohmann::json to_json(const CorrectionReport& r) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& o : r.outcomes) {
        nlohmann::json j = {{"index", o.index}, {"node", o.node.str()}, {"applied", o.applied}, {"message", o.message}};
        j["error"] = o.error ? nlohmann::json(to_string(*o.error)) : nlohmann::json(nullptr);
        arr.push_back(std::move(j));
    }
    return {{"applied", r.applied()}, {"failed", r.failed()}, {"outcomes", std::move(arr)}};
}

namespace {

void apply_one_correction(Hierarchy& g, const Correction& c) {
    for (const NodeId& p : c.add_parents)
        if (c.remove_parents.contains(p))
            throw Error(ErrorCode::PreconditionFailed, "'" + p.str() + "' is both removed and added as parent");
    if (!g.contains(c.node)) throw Error(ErrorCode::UnknownNode, "'" + c.node.str() + "'");
    for (const NodeId& p : c.remove_parents)
        if (!g.contains(p)) throw Error(ErrorCode::UnknownNode, "parent '" + p.str() + "'");
    for (const NodeId& p : c.add_parents)
        if (!g.contains(p)) throw Error(ErrorCode::UnknownNode, "parent '" + p.str() + "'");

    std::vector<std::pair<NodeId, EdgeProvenance>> removed;
    std::vector<NodeId> added;
    auto rollback = [&] {
        for (const NodeId& p : added) g.remove_edge(p, c.node);
        for (const auto& [p, prov] : removed) g.insert_edge_unchecked(p, c.node, prov);
    };
    try {
        for (const NodeId& p : c.remove_parents) {
            if (auto prov = g.edge_provenance(p, c.node)) {
                g.remove_edge(p, c.node);
                removed.emplace_back(p, *prov);
            }
        }
        for (const NodeId& p : c.add_parents) {
            if (auto prov = g.edge_provenance(p, c.node)) {
                // Reviewer confirmed an existing edge: re-stamp its provenance.
                g.remove_edge(p, c.node);
                removed.emplace_back(p, *prov);
            }
            g.add_edge(p, c.node, EdgeProvenance::human_corrected);
            added.push_back(p);
        }
    } catch (...) {
        rollback();
        throw;
    }
}

} // namespace

Hierarchy apply_corrections(const Hierarchy& graph, const CorrectionSet& corrections, CorrectionReport* report) {
    Hierarchy g = graph;
    CorrectionReport local;
    for (std::size_t i = 0; i < corrections.corrections.size(); ++i) {
        const Correction& c = corrections.corrections[i];
        CorrectionOutcome outcome{i, c.node, false, std::nullopt, {}};
        try {
            apply_one_correction(g, c);
            outcome.applied = true;
        } catch (const Error& e) {
            outcome.error = e.code();
            outcome.message = e.what();
            spdlog::warn("correction {} on '{}' rejected: {}", i, c.node.str(), e.what());
        }
        local.outcomes.push_back(std::move(outcome));
    }
    if (report) *report = std::move(local);
    return g;
}

// Deltas ---------------------------------------------------------------------

Hierarchy apply_delta(const Hierarchy& graph, const HierarchyDelta& delta, const ApplyOptions& options) {
    if (!graph.contains(delta.l1_category))
        throw Error(ErrorCode::UnknownNode, "delta category '" + delta.l1_category.str() + "'");
    if (!graph.is_root(delta.l1_category))
        throw Error(ErrorCode::StaleDelta, "'" + delta.l1_category.str() + "' is no longer an L1 root");
    if (options.check_base)
        for (const auto& [p, c] : delta.base_edges)
            if (!graph.has_edge(p, c))
                throw Error(ErrorCode::StaleDelta, "edge " + p.str() + " -> " + c.str() + " of the subgraph of '" +
                                                       delta.l1_category.str() +
                                                       "' is gone since the delta was generated");
    for (const NodeId& u : delta.unplaced)
        if (!graph.contains(u)) throw Error(ErrorCode::UnknownNode, "unplaced node '" + u.str() + "'");

    Hierarchy out = graph;
    for (std::size_t i = 0; i < delta.edges_added.size(); ++i) {
        if (options.before_edge) options.before_edge(i);
        const auto& [p, c] = delta.edges_added[i];
        if (!out.contains(p)) throw Error(ErrorCode::UnknownNode, "delta parent '" + p.str() + "'");
        if (!out.contains(c)) throw Error(ErrorCode::UnknownNode, "delta child '" + c.str() + "'");
        out.add_edge(p, c, EdgeProvenance::generated);
    }
    return out;
}

// Merge ----------------------------------------------------------------------

nlohmann::json to_json(const MergeReport& r) {
    auto pairs = [](const std::vector<std::pair<NodeId, NodeId>>& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [a, b] : v) arr.push_back({a.str(), b.str()});
        return arr;
    };
    nlohmann::json dropped = nlohmann::json::array();
    for (const auto& d : r.dropped_edges)
        dropped.push_back({{"parent", d.parent.str()}, {"child", d.child.str()}, {"reason", d.reason}});
    nlohmann::json roots = nlohmann::json::array();
    for (const auto& id : r.new_roots) roots.push_back(id.str());
    return {{"unified", pairs(r.unified)},       {"renamed", pairs(r.renamed)},
            {"inserted_nodes", r.inserted_nodes}, {"inserted_edges", r.inserted_edges},
            {"new_roots", std::move(roots)},      {"dropped_edges", std::move(dropped)}};
}

Hierarchy merge_subgraph(const Hierarchy& kg, const Hierarchy& sub, MergeReport* report) {
    Hierarchy out = kg;
    MergeReport local;
    for (const auto& c : sub.classes()) out.register_class(c);

    std::unordered_map<NodeId, NodeId> mapped;
    std::unordered_set<NodeId> inserted;
    for (const Node& n : sub.nodes()) {
        if (auto hit = out.find_by_label(n.node_class, n.label)) {
            out.merge_attributes(*hit, n.attributes);
            mapped.emplace(n.id, *hit);
            local.unified.emplace_back(n.id, *hit);
            continue;
        }
        Node copy = n;
        if (out.contains(copy.id)) {
            int k = 1;
            while (out.contains(NodeId(n.id.str() + "~" + std::to_string(k)))) ++k;
            copy.id = NodeId(n.id.str() + "~" + std::to_string(k));
            local.renamed.emplace_back(n.id, copy.id);
        }
        mapped.emplace(n.id, copy.id);
        inserted.insert(copy.id);
        out.add_node(std::move(copy));
        ++local.inserted_nodes;
    }

    for (const NodeId& r : sub.roots()) {
        const NodeId& id = mapped.at(r);
        if (inserted.contains(id) && !out.is_root(id)) {
            out.add_root(id);
            local.new_roots.push_back(id);
        }
    }

    for (const Edge& e : sub.edges()) {
        const NodeId& p = mapped.at(e.parent);
        const NodeId& c = mapped.at(e.child);
        auto drop = [&](std::string reason) { local.dropped_edges.push_back({p, c, std::move(reason)}); };
        if (p == c) {
            drop("endpoints unified into one node");
            continue;
        }
        if (out.is_root(c)) {
            if (!out.has_edge(p, c)) drop("child is an L1 root");
            continue;
        }
        try {
            if (out.add_edge(p, c, e.provenance)) ++local.inserted_edges;
        } catch (const Error& err) {
            drop(std::string(to_string(err.code())) + ": " + err.what());
        }
    }
    if (report) *report = std::move(local);
    return out;
}

// Serialization --------------------------------------------------------------

nlohmann::json to_json(const Hierarchy& h) {
    std::vector<const Node*> nodes;
    for (const Node& n : h.nodes()) nodes.push_back(&n);
    std::sort(nodes.begin(), nodes.end(), [](const Node* a, const Node* b) { return a->id < b->id; });
    nlohmann::json jnodes = nlohmann::json::array();
    for (const Node* n : nodes)
        jnodes.push_back({{"id", n->id.str()}, {"label", n->label}, {"class", n->node_class}, {"attributes", n->attributes}});

    auto edges = h.edges();
    std::sort(edges.begin(), edges.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.parent, a.child) < std::tie(b.parent, b.child); });
    nlohmann::json jedges = nlohmann::json::array();
    for (const Edge& e : edges)
        jedges.push_back({{"parent", e.parent.str()}, {"child", e.child.str()}, {"provenance", to_string(e.provenance)}});

    nlohmann::json roots = nlohmann::json::array();
    for (const NodeId& r : h.roots()) roots.push_back(r.str());
    return {{"class_filter", h.class_filter()},
            {"classes", h.classes()},
            {"nodes", std::move(jnodes)},
            {"edges", std::move(jedges)},
            {"l1_roots", std::move(roots)}};
}

Hierarchy hierarchy_from_json(const nlohmann::json& j) {
    return schema_guard("hierarchy", [&] {
        Hierarchy h(j.value("class_filter", std::string{}));
        for (const auto& c : j.at("classes")) h.register_class(c.get<std::string>());
        for (const auto& n : j.at("nodes"))
            h.add_node(Node{id_at(n, "id"), n.at("label").get<std::string>(), n.at("class").get<std::string>(),
                            n.value("attributes", Attributes{})});
        for (const auto& e : j.at("edges"))
            h.insert_edge_unchecked(id_at(e, "parent"), id_at(e, "child"),
                                    edge_provenance_from_string(e.value("provenance", std::string("preexisting"))));
        for (const auto& r : j.at("l1_roots")) h.insert_root_unchecked(NodeId(r.get<std::string>()));
        return h;
    });
}

namespace {

constexpr std::string_view kChecksumPrefix = "checksum sha256:";

nlohmann::json to_json(const ProvenanceEntry& e) {
    return {{"seq", e.seq}, {"kind", e.kind}, {"timestamp", e.timestamp}, {"payload", e.payload}};
}

ProvenanceEntry entry_from_json(const nlohmann::json& j) {
    return ProvenanceEntry{j.at("seq").get<std::uint64_t>(), j.at("kind").get<std::string>(),
                           j.at("timestamp").get<std::string>(), j.at("payload")};
}

} // namespace

std::string save_snapshot(const GraphSnapshot& s) {
    nlohmann::json doc = to_json(s.hierarchy);
    doc["format_version"] = kSnapshotFormatVersion;
    nlohmann::json log = nlohmann::json::array();
    for (const auto& e : s.provenance_log) log.push_back(to_json(e));
    doc["provenance_log"] = std::move(log);
    // nlohmann::json objects keep keys sorted, so dump() is canonical.
    std::string body = doc.dump(1);
    body += '\n';
    return body + std::string(kChecksumPrefix) + sha256_hex(body) + "\n";
}

GraphSnapshot load_snapshot(std::string_view bytes) {
    const auto marker = bytes.rfind(kChecksumPrefix);
    if (marker == std::string_view::npos || (marker > 0 && bytes[marker - 1] != '\n'))
        throw Error(ErrorCode::CorruptSnapshot, "missing checksum line");
    const std::string_view body = bytes.substr(0, marker);
    std::string_view digest = bytes.substr(marker + kChecksumPrefix.size());
    while (!digest.empty() && (digest.back() == '\n' || digest.back() == '\r')) digest.remove_suffix(1);
    if (sha256_hex(body) != digest) throw Error(ErrorCode::CorruptSnapshot, "checksum mismatch");

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CorruptSnapshot, std::string("unreadable snapshot: ") + e.what());
    }
    const int version = doc.value("format_version", 0);
    if (version != kSnapshotFormatVersion)
        throw Error(ErrorCode::UnsupportedVersion, "snapshot format_version " + std::to_string(version));

    GraphSnapshot s;
    try {
        s.hierarchy = hierarchy_from_json(doc);
        for (const auto& e : doc.at("provenance_log")) s.provenance_log.push_back(entry_from_json(e));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CorruptSnapshot, e.what());
    } catch (const Error& e) {
        throw Error(ErrorCode::CorruptSnapshot, e.what());
    }
    if (auto v = s.hierarchy.validate(); !v.empty())
        throw Error(ErrorCode::CorruptSnapshot, "snapshot violates '" + v.front().invariant + "': " + v.front().message);
    return s;
}

GraphSnapshot read_snapshot_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read snapshot '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_snapshot(buf.str());
}

void write_snapshot_file(const std::filesystem::path& path, const GraphSnapshot& snapshot) {
    const std::string text = save_snapshot(snapshot);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + tmp.string() + "'");
        out << text;
        if (!out.flush()) throw Error(ErrorCode::ConfigError, "short write to '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

// Provenance -----------------------------------------------------------------

namespace {

GraphSnapshot with_entry(Hierarchy h, const GraphSnapshot& s, std::string kind, std::string timestamp,
                         nlohmann::json payload) {
    GraphSnapshot out{std::move(h), s.provenance_log};
    const std::uint64_t seq = s.provenance_log.empty() ? 1 : s.provenance_log.back().seq + 1;
    out.provenance_log.push_back({seq, std::move(kind), std::move(timestamp), std::move(payload)});
    return out;
}

nlohmann::json node_json(const Node& n) {
    return {{"id", n.id.str()}, {"label", n.label}, {"class", n.node_class}, {"attributes", n.attributes}};
}

} // namespace

GraphSnapshot commit_delta(const GraphSnapshot& s, const HierarchyDelta& delta, std::string timestamp,
                           const ApplyOptions& options) {
    nlohmann::json payload = to_json(delta);
    for (const auto& e : s.provenance_log)
        if (e.kind == "delta" && e.payload == payload)
            throw Error(ErrorCode::StaleDelta, "delta for '" + delta.l1_category.str() + "' was already applied (entry " +
                                                   std::to_string(e.seq) + ")");
    return with_entry(apply_delta(s.hierarchy, delta, options), s, "delta", std::move(timestamp), std::move(payload));
}

GraphSnapshot commit_corrections(const GraphSnapshot& s, const CorrectionSet& corrections, std::string timestamp,
                                 CorrectionReport* report) {
    return with_entry(apply_corrections(s.hierarchy, corrections, report), s, "corrections", std::move(timestamp),
                      to_json(corrections));
}

GraphSnapshot commit_merge(const GraphSnapshot& s, const Hierarchy& domain_subgraph, std::string timestamp,
                           MergeReport* report) {
    return with_entry(merge_subgraph(s.hierarchy, domain_subgraph, report), s, "merge", std::move(timestamp),
                      to_json(domain_subgraph));
}

GraphSnapshot commit_import(const GraphSnapshot& s, const std::vector<Node>& nodes, std::string timestamp) {
    Hierarchy h = s.hierarchy;
    nlohmann::json payload = nlohmann::json::array();
    for (const Node& n : nodes) {
        h.register_class(n.node_class);
        h.add_node(n);
        payload.push_back(node_json(n));
    }
    return with_entry(std::move(h), s, "import", std::move(timestamp), std::move(payload));
}

GraphSnapshot replay(const GraphSnapshot& base, const std::vector<ProvenanceEntry>& log) {
    const std::uint64_t after = base.provenance_log.empty() ? 0 : base.provenance_log.back().seq;
    GraphSnapshot s = base;
    for (const ProvenanceEntry& e : log) {
        if (e.seq <= after) continue;
        GraphSnapshot next;
        if (e.kind == "delta") {
            next = commit_delta(s, delta_from_json(e.payload), e.timestamp);
        } else if (e.kind == "corrections") {
            next = commit_corrections(s, correction_set_from_json(e.payload), e.timestamp);
        } else if (e.kind == "merge") {
            next = commit_merge(s, hierarchy_from_json(e.payload), e.timestamp);
        } else if (e.kind == "import") {
            std::vector<Node> nodes;
            for (const auto& n : e.payload)
                nodes.push_back(Node{id_at(n, "id"), n.at("label").get<std::string>(), n.at("class").get<std::string>(),
                                     n.value("attributes", Attributes{})});
            next = commit_import(s, nodes, e.timestamp);
        } else {
            throw Error(ErrorCode::CorruptSnapshot, "unknown provenance kind '" + e.kind + "'");
        }
        next.provenance_log.back().seq = e.seq;
        s = std::move(next);
    }
    return s;
}

// CSV ------------------------------------------------------------------------

namespace {

/// One RFC 4180 record; returns false at end of input.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    if (in.peek() == std::char_traits<char>::eof()) return false;
    std::string field;
    bool quoted = false;
    bool any = false;
    char ch;
    while (in.get(ch)) {
        any = true;
        if (quoted) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get(ch);
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            break;
        } else if (ch != '\r') {
            field += ch;
        }
    }
    if (quoted) throw Error(ErrorCode::SchemaError, "unterminated quoted CSV field");
    if (any) fields.push_back(std::move(field));
    return any;
}

} // namespace

std::vector<Node> read_nodes_csv(std::istream& in) {
    std::vector<std::string> header;
    if (!read_csv_record(in, header)) throw Error(ErrorCode::SchemaError, "node CSV is empty");
    if (header.size() < 3 || header[0] != "id" || header[1] != "label" || header[2] != "class")
        throw Error(ErrorCode::SchemaError, "node CSV header must start with id,label,class");
    std::vector<Node> nodes;
    std::vector<std::string> row;
    std::size_t line = 1;
    while (read_csv_record(in, row)) {
        ++line;
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != header.size())
            throw Error(ErrorCode::SchemaError, "node CSV line " + std::to_string(line) + " has " +
                                                    std::to_string(row.size()) + " fields, expected " +
                                                    std::to_string(header.size()));
        if (row[0].empty() || row[1].empty() || row[2].empty())
            throw Error(ErrorCode::SchemaError, "node CSV line " + std::to_string(line) + " has an empty id, label or class");
        Node n{NodeId(row[0]), row[1], row[2], {}};
        for (std::size_t i = 3; i < row.size(); ++i)
            if (!row[i].empty()) n.attributes.emplace(header[i], row[i]);
        nodes.push_back(std::move(n));
    }
    return nodes;
}

} // namespace hiergen
