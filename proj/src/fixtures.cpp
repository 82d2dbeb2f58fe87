// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "hiergen/fixtures.hpp"

#include "hiergen/random.hpp"

#include <array>
#include <cstdio>
#include <string_view>

namespace hiergen::fixtures {

namespace {

constexpr std::array<std::string_view, 32> kModifiers = {
    "birthday", "wedding", "summer",  "vintage", "modern",   "minimal",  "holiday", "business",
    "school",   "travel",  "fitness", "party",   "baby",     "retro",    "floral",  "corporate",
    "spring",   "winter",  "autumn",  "kids",    "family",   "romantic", "spooky",  "festive",
    "outdoor",  "coffee",  "garden",  "beach",   "mountain", "city",     "music",   "sports"};

constexpr std::array<std::string_view, 48> kSubjects = {
    "card",      "flyer",   "poster",   "invitation", "banner",    "logo",     "menu",     "resume",
    "brochure",  "story",   "post",     "thumbnail",  "collage",   "calendar", "planner",  "certificate",
    "label",     "sticker", "ticket",   "badge",      "postcard",  "newsletter", "report", "slide deck",
    "cover",     "album",   "portrait", "announcement", "coupon",  "receipt",  "letterhead", "infographic",
    "checklist", "journal", "recipe",   "playlist",   "schedule",  "itinerary", "guide",   "quote",
    "meme",      "mockup",  "pattern",  "wallpaper",  "frame",     "greeting", "note",     "map"};

/// Unique, readable labels: "<modifier> <subject>" with a counter once
/// the combinations run out.
std::string synthetic_label(std::size_t i) {
    const std::size_t combos = kModifiers.size() * kSubjects.size();
    std::string label = std::string(kModifiers[i % kModifiers.size()]) + " " +
                        std::string(kSubjects[(i / kModifiers.size()) % kSubjects.size()]);
    if (i >= combos) label += " " + std::to_string(i / combos + 1);
    return label;
}

std::string padded_id(std::string_view prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%05zu", i);
    return std::string(prefix) + ":" + buf;
}

NodeId add(Hierarchy& h, std::string id, std::string label, const std::string& node_class) {
    NodeId nid(std::move(id));
    h.add_node(Node{nid, std::move(label), node_class, {}});
    return nid;
}

} // namespace

Hierarchy make_gold_taxonomy(const GoldOptions& o) {
    if (o.depth < 1 || o.roots == 0) throw Error(ErrorCode::PreconditionFailed, "gold taxonomy needs depth >= 1 and a root");
    if (o.nodes < o.roots + static_cast<std::size_t>(o.depth - 1))
        throw Error(ErrorCode::PreconditionFailed, "too few nodes to reach the requested depth");

    Hierarchy h(o.node_class);
    h.register_class(o.node_class);
    Rng rng(mix_seed(o.seed, 0x676f6c64));  // "gold"
    std::vector<std::vector<NodeId>> by_level(static_cast<std::size_t>(o.depth) + 1);
    std::size_t next = 0;
    auto fresh = [&] {
        const std::size_t i = next++;
        return add(h, padded_id("n", i), synthetic_label(i), o.node_class);
    };

    for (std::size_t r = 0; r < o.roots; ++r) {
        NodeId id = fresh();
        h.add_root(id);
        by_level[1].push_back(id);
    }
    // A spine guarantees the requested depth.
    for (int level = 2; level <= o.depth; ++level) {
        NodeId id = fresh();
        h.add_edge(by_level[level - 1].front(), id, EdgeProvenance::preexisting);
        by_level[level].push_back(id);
    }
    while (next < o.nodes) {
        // Parent level drawn so shallow and deep parents are both common.
        const int parent_level = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(o.depth - 1 > 0 ? o.depth - 1 : 1)));
        if (o.depth == 1) break;
        const auto& pool = by_level[parent_level];
        NodeId id = fresh();
        const NodeId parent = pool[rng.index(pool.size())];
        h.add_edge(parent, id, EdgeProvenance::preexisting);
        if (pool.size() > 1 && rng.bernoulli(o.multi_parent_rate)) {
            NodeId second = pool[rng.index(pool.size())];
            if (second != parent) h.add_edge(second, id, EdgeProvenance::preexisting);
        }
        by_level[parent_level + 1].push_back(id);
    }
    return h;
}

Hierarchy strip_to_level(const Hierarchy& gold, int keep_level) {
    Hierarchy out(gold.class_filter());
    for (const auto& c : gold.classes()) out.register_class(c);
    for (const Node& n : gold.nodes()) out.add_node(n);
    for (const NodeId& r : gold.roots()) out.add_root(r);
    const auto levels = gold.levels();
    auto level = [&](const NodeId& id) {
        auto it = levels.find(id);
        return it == levels.end() ? keep_level + 1 : it->second;
    };
    for (const Edge& e : gold.edges())
        if (level(e.parent) <= keep_level && level(e.child) <= keep_level)
            out.add_edge(e.parent, e.child, EdgeProvenance::preexisting);
    return out;
}

std::vector<CandidateSet> candidate_sets(const Hierarchy& gold, const Hierarchy& existing) {
    std::vector<CandidateSet> out;
    for (const NodeId& root : gold.roots()) {
        const auto present = existing.contains(root) ? existing.descendants(root) : std::set<NodeId>{};
        const auto wanted = gold.descendants(root);
        CandidateSet cs{root, {}};
        for (const Node& n : gold.nodes())  // insertion order keeps the output stable
            if (wanted.contains(n.id) && !present.contains(n.id)) cs.candidates.push_back(n.id);
        if (!cs.candidates.empty()) out.push_back(std::move(cs));
    }
    return out;
}

// Table 1 shaped graphs ------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 25> kIntentCategories = {
    "Celebrations", "Relationships", "Beauty and Wellness", "Travel",     "Business",
    "Education",    "Food and Drink", "Fashion",            "Home",       "Sports",
    "Music",        "Photography",   "Holidays",            "Health and Fitness", "Technology",
    "Art and Design", "Social Media", "Marketing",          "Events",     "Nature",
    "Family",       "Pets",          "Real Estate",         "Nonprofit",  "Entertainment"};

} // namespace

CoverageFixture make_intents_table1() {
    constexpr std::size_t kL2 = 904, kL3 = 4684, kL4 = 4961, kL5 = 1200, kL6 = 565;
    constexpr std::size_t kExtraDeepParents = 1430, kIsolated = 46, kBeforeL3 = 27;
    const std::string cls = "intent";

    Hierarchy after(cls);
    after.register_class(cls);
    Rng rng(0x5461626c6531);  // "Table1"
    std::size_t next = 0;
    auto fresh = [&](std::string label) { return add(after, padded_id("intent", next++), std::move(label), cls); };

    std::vector<NodeId> roots, l2, l3, l4, l5, l6;
    for (auto name : kIntentCategories) {
        roots.push_back(fresh(std::string(name)));
        after.add_root(roots.back());
    }
    const NodeId& relationships = roots[1];

    // Figure-style anchors first so their ids are stable.
    const NodeId love = fresh("love");
    const NodeId marriage = fresh("marriage");
    after.add_edge(relationships, love, EdgeProvenance::preexisting);
    after.add_edge(relationships, marriage, EdgeProvenance::preexisting);
    l2 = {love, marriage};
    std::size_t label_i = 0;
    while (l2.size() < kL2) {
        NodeId id = fresh(synthetic_label(label_i++));
        after.add_edge(roots[l2.size() % roots.size()], id, EdgeProvenance::preexisting);
        l2.push_back(id);
    }

    const NodeId mom_dad = fresh("mom dad");
    const NodeId romantic = fresh("romantic message");
    after.add_edge(love, mom_dad, EdgeProvenance::generated);
    after.add_edge(love, romantic, EdgeProvenance::generated);
    l3 = {mom_dad, romantic};
    auto grow = [&](std::vector<NodeId>& level, const std::vector<NodeId>& parents, std::size_t count) {
        while (level.size() < count) {
            NodeId id = fresh(synthetic_label(label_i++));
            after.add_edge(parents[rng.index(parents.size())], id, EdgeProvenance::generated);
            level.push_back(id);
        }
    };
    grow(l3, l2, kL3);
    grow(l4, l3, kL4);
    grow(l5, l4, kL5);
    grow(l6, l5, kL6);

    // Second parents one level up from level 4; deep nodes only, so every
    // such placement lands in the 5+ bucket.
    std::size_t extra = 0;
    for (auto* level : {&l5, &l6})
        for (const NodeId& id : *level) {
            if (extra == kExtraDeepParents) break;
            NodeId p = l4[rng.index(l4.size())];
            while (after.has_edge(p, id)) p = l4[rng.index(l4.size())];
            after.add_edge(p, id, EdgeProvenance::generated);
            ++extra;
        }
    for (std::size_t i = 0; i < kIsolated; ++i) fresh(synthetic_label(label_i++));

    Hierarchy before(cls);
    before.register_class(cls);
    for (const Node& n : after.nodes()) before.add_node(n);
    for (const NodeId& r : roots) before.add_root(r);
    for (const NodeId& id : l2) before.add_edge(after.parents(id).front(), id, EdgeProvenance::preexisting);
    for (std::size_t i = 2; i < kBeforeL3 + 2; ++i)
        before.add_edge(after.parents(l3[i]).front(), l3[i], EdgeProvenance::preexisting);
    return {std::move(before), std::move(after), cls};
}

CoverageFixture make_colors_table1() {
    constexpr std::array<std::string_view, 12> kHues = {"red",   "orange", "yellow", "green", "blue",  "purple",
                                                        "pink",  "brown",  "black",  "white", "gray",  "beige"};
    constexpr std::array<std::string_view, 9> kShades = {"light", "dark", "pastel", "neon", "muted",
                                                         "deep",  "pale", "bright", "dusty"};
    const std::string cls = "color";
    Hierarchy after(cls);
    after.register_class(cls);
    std::size_t next = 0;
    auto fresh = [&](std::string label) { return add(after, padded_id("color", next++), std::move(label), cls); };

    std::vector<NodeId> roots, l2;
    for (auto hue : kHues) {
        roots.push_back(fresh(std::string(hue)));
        after.add_root(roots.back());
    }
    for (auto shade : kShades)
        for (std::size_t h = 0; h < kHues.size(); ++h) {
            NodeId id = fresh(std::string(shade) + " " + std::string(kHues[h]));
            after.add_edge(roots[h], id, EdgeProvenance::generated);
            l2.push_back(id);
        }
    // 12 + 108 so far; 208 third-level tints bring the class to 328.
    std::size_t i = 0;
    while (after.node_count() < 328) {
        const NodeId& parent = l2[i % l2.size()];
        NodeId id = fresh(after.node(parent).label + " tint " + std::to_string(i / l2.size() + 1));
        after.add_edge(parent, id, EdgeProvenance::generated);
        ++i;
    }

    Hierarchy before(cls);
    before.register_class(cls);
    for (const Node& n : after.nodes()) before.add_node(n);
    for (const NodeId& r : roots) before.add_root(r);
    return {std::move(before), std::move(after), cls};
}

// Classification -------------------------------------------------------------

ClassificationFixture make_classification_fixture() {
    struct Entry {
        std::string_view label;
        std::vector<std::size_t> categories;  // indices into the category list; empty = Other
    };
    const std::vector<std::string> categories = {"Celebrations", "Travel", "Food and Drink", "Beauty and Wellness",
                                                 "Business"};
    const std::vector<Entry> entries = {
        {"birthday card", {0}},     {"birthday party", {0}},     {"wedding invitation", {0}}, {"baby shower", {0}},
        {"anniversary gift", {0}},  {"graduation party", {0}},   {"holiday greeting", {0}},   {"retirement party", {0}},
        {"beach vacation", {1}},    {"road trip", {1}},          {"packing list", {1}},       {"hotel booking", {1}},
        {"passport photo", {1}},    {"city guide", {1}},         {"camping trip", {1}},       {"flight itinerary", {1}},
        {"pasta recipe", {2}},      {"coffee shop menu", {2}},   {"wine tasting", {2}},       {"bakery logo", {2}},
        {"meal plan", {2}},         {"cocktail list", {2}},      {"food truck", {2}},         {"grocery list", {2}},
        {"lipstick", {3}},          {"skin care routine", {3}},  {"yoga class", {3}},         {"spa day", {3}},
        {"hair salon", {3}},        {"nail art", {3}},           {"meditation", {3}},         {"perfume", {3}},
        {"business card", {4}},     {"invoice", {4}},            {"pitch deck", {4}},         {"company logo", {4}},
        {"job posting", {4}},       {"quarterly report", {4}},   {"letterhead", {4}},         {"team meeting", {4}},
        {"wedding cake", {0, 2}},   {"destination wedding", {0, 1}}, {"travel insurance", {1, 4}},
        {"restaurant opening", {2, 4}}, {"bridal makeup", {0, 3}},
        {"quantum physics", {}},    {"tax law", {}},             {"volcano", {}},             {"chess opening", {}},
        {"origami crane", {}}};

    auto gold = std::make_shared<Hierarchy>("intent");
    gold->register_class("intent");
    std::vector<NodeId> roots;
    for (std::size_t c = 0; c < categories.size(); ++c) {
        roots.push_back(add(*gold, padded_id("cat", c), categories[c], "intent"));
        gold->add_root(roots.back());
    }

    ClassificationFixture fx;
    fx.categories = CategorySet{categories, "intent"};
    for (std::size_t i = 0; i < entries.size(); ++i) {
        Node n{NodeId(padded_id("cls", i)), std::string(entries[i].label), "intent", {}};
        fx.nodes.push_back(n);
        std::set<std::string> labels;
        if (!entries[i].categories.empty()) {
            gold->add_node(n);
            for (std::size_t c : entries[i].categories) {
                gold->add_edge(roots[c], n.id, EdgeProvenance::preexisting);
                labels.insert(categories[c]);
            }
        } else {
            labels.insert(std::string(kOtherCategory));
        }
        fx.gold_labels.emplace(n.id, std::move(labels));
    }
    fx.examples = {{"christmas card", {"Celebrations"}},
                   {"airport transfer", {"Travel"}},
                   {"smoothie recipe", {"Food and Drink"}},
                   {"sales report", {"Business"}},
                   {"black hole", {std::string(kOtherCategory)}}};
    fx.gold = std::move(gold);
    return fx;
}

Hierarchy make_prefix_pair_fixture() {
    struct Pair {
        std::string_view parent;
        std::string_view child;
    };
    // Level-2 anchors with prefix-sharing children and grandchildren.
    const std::vector<std::string_view> level2 = {"birthday", "wedding", "party", "card", "travel", "photo"};
    const std::vector<Pair> deeper = {
        {"birthday", "birthday party"},           {"birthday", "birthday card"},
        {"birthday party", "birthday party invitation"}, {"birthday card", "birthday card for mom"},
        {"wedding", "wedding invitation"},        {"wedding", "wedding cake"},
        {"wedding invitation", "wedding invitation card"}, {"party", "party flyer"},
        {"party", "party playlist"},             {"party flyer", "party flyer template"},
        {"card", "card design"},                  {"card design", "card design ideas"},
        {"travel", "travel planner"},             {"travel", "travel photo"},
        {"travel planner", "travel planner printable"}, {"photo", "photo collage"},
        {"photo collage", "photo collage template"}, {"photo", "photo book"},
        {"birthday party invitation", "birthday party invitation template"},
        {"wedding invitation card", "wedding invitation card design"}};

    Hierarchy h("intent");
    h.register_class("intent");
    std::size_t next = 0;
    auto fresh = [&](std::string_view label) { return add(h, padded_id("p", next++), std::string(label), "intent"); };
    const NodeId root = fresh("Celebrations");
    h.add_root(root);
    for (auto label : level2) h.add_edge(root, fresh(label), EdgeProvenance::preexisting);
    for (const auto& [parent, child] : deeper) {
        const NodeId c = fresh(child);
        h.add_edge(*h.find_by_label("intent", parent), c, EdgeProvenance::preexisting);
    }
    // Shared child across a prefix pair: multi-parent on purpose.
    h.add_edge(*h.find_by_label("intent", "party"), *h.find_by_label("intent", "birthday party"),
               EdgeProvenance::preexisting);
    return h;
}

MisplacementFixture make_love_marriage_fixture() {
    auto build = [](bool misplaced) {
        Hierarchy h("intent");
        h.register_class("intent");
        const NodeId root = add(h, "intent:rel", "Relationships", "intent");
        h.add_root(root);
        const NodeId love = add(h, "intent:love", "love", "intent");
        const NodeId marriage = add(h, "intent:marriage", "marriage", "intent");
        const NodeId mom_dad = add(h, "intent:momdad", "mom dad", "intent");
        const NodeId romantic = add(h, "intent:romantic", "romantic message", "intent");
        const NodeId vows = add(h, "intent:vows", "wedding vows", "intent");
        h.add_edge(root, love, EdgeProvenance::preexisting);
        h.add_edge(root, marriage, EdgeProvenance::preexisting);
        h.add_edge(love, romantic, EdgeProvenance::generated);
        h.add_edge(marriage, vows, EdgeProvenance::generated);
        h.add_edge(misplaced ? love : marriage, mom_dad, EdgeProvenance::generated);
        return h;
    };
    return {std::make_shared<const Hierarchy>(build(false)), build(true)};
}

} // namespace hiergen::fixtures
