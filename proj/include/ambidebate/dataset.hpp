#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ambidebate/errors.hpp"
#include "ambidebate/rng.hpp"
#include "ambidebate/types.hpp"

namespace ambidebate {

enum class AmbiguityType { Numerical, AttributeNoun, AttributeColor, Spatial };

// Reporting category: the two attribute flavors fold into one bucket.
enum class AmbiguityCategory { Numerical, Attribute, Spatial };

inline AmbiguityCategory category_of(AmbiguityType t) {
    switch (t) {
        case AmbiguityType::Numerical: return AmbiguityCategory::Numerical;
        case AmbiguityType::AttributeNoun:
        case AmbiguityType::AttributeColor: return AmbiguityCategory::Attribute;
        case AmbiguityType::Spatial: return AmbiguityCategory::Spatial;
    }
    return AmbiguityCategory::Numerical;
}

inline std::string to_string(AmbiguityType t) {
    switch (t) {
        case AmbiguityType::Numerical: return "numerical";
        case AmbiguityType::AttributeNoun: return "attribute_noun";
        case AmbiguityType::AttributeColor: return "attribute_color";
        case AmbiguityType::Spatial: return "spatial";
    }
    return "unknown";
}

inline std::string to_string(AmbiguityCategory c) {
    switch (c) {
        case AmbiguityCategory::Numerical: return "numerical";
        case AmbiguityCategory::Attribute: return "attribute";
        case AmbiguityCategory::Spatial: return "spatial";
    }
    return "unknown";
}

inline AmbiguityType ambiguity_type_from_string(const std::string& s, const std::string& path) {
    if (s == "numerical") return AmbiguityType::Numerical;
    if (s == "attribute_noun") return AmbiguityType::AttributeNoun;
    if (s == "attribute_color") return AmbiguityType::AttributeColor;
    if (s == "spatial") return AmbiguityType::Spatial;
    throw SchemaError(path, "unknown ambiguity_type '" + s + "'");
}

// Half-open character range [begin, end) into an instruction string.
struct CharSpan {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;

    std::uint32_t length() const { return end - begin; }
    bool operator==(const CharSpan&) const = default;
};

inline std::string number_word(int n) {
    switch (n) {
        case 0: return "zero";
        case 1: return "one";
        case 2: return "two";
        case 3: return "three";
        case 4: return "four";
        case 5: return "five";
        default: return std::to_string(n);
    }
}

// The fixed tabletop scene every instruction is grounded in.
struct ScenarioContext {
    std::string description;
    std::map<std::string, int> block_inventory;
    std::map<std::string, int> bowl_inventory;

    static std::string render_description(const std::map<std::string, int>& blocks,
                                          const std::map<std::string, int>& bowls) {
        auto phrase_list = [](const std::map<std::string, int>& inv, const std::string& noun) {
            std::vector<std::string> phrases;
            for (const auto& [color, count] : inv) {
                if (count <= 0) continue;
                phrases.push_back(number_word(count) + " " + color + " " + noun +
                                  (count == 1 ? "" : "s"));
            }
            std::string out;
            for (std::size_t i = 0; i < phrases.size(); ++i) {
                if (i > 0) out += (i + 1 == phrases.size()) ? ", and " : ", ";
                out += phrases[i];
            }
            return out;
        };
        return "On the table there are " + phrase_list(blocks, "block") + ", and " +
               phrase_list(bowls, "bowl") + ".";
    }

    // Three blocks and one bowl per color.
    static ScenarioContext default_scene() {
        ScenarioContext ctx;
        for (const std::string color : {"red", "yellow", "green"}) {
            ctx.block_inventory[color] = 3;
            ctx.bowl_inventory[color] = 1;
        }
        ctx.description = render_description(ctx.block_inventory, ctx.bowl_inventory);
        return ctx;
    }

    bool operator==(const ScenarioContext&) const = default;
};

// True iff every color/count pair of both inventories is stated verbatim in
// the description text.
inline bool description_is_faithful(const ScenarioContext& ctx) {
    auto mentioned = [&](const std::map<std::string, int>& inv, const std::string& noun) {
        for (const auto& [color, count] : inv) {
            if (count <= 0) continue;
            const std::string phrase =
                number_word(count) + " " + color + " " + noun + (count == 1 ? "" : "s");
            if (ctx.description.find(phrase) == std::string::npos) return false;
        }
        return true;
    };
    return mentioned(ctx.block_inventory, "block") && mentioned(ctx.bowl_inventory, "bowl");
}

// Everything needed to reconstruct or audit one instruction pair. Exactly one
// of quantity_vague / noun_substitute / color_substitute / preposition_vague
// is set, matching the entry's ambiguity type.
struct SlotRecord {
    std::string action;
    std::string object_noun;
    std::string object_color;
    std::string quantity_precise;
    int quantity_count = 1; // "all" is resolved against the inventory at generation time
    std::optional<std::string> quantity_vague;
    std::optional<std::string> noun_substitute;
    std::optional<std::string> color_substitute;
    std::string preposition_precise;
    std::optional<std::string> preposition_vague;
    std::string landmark_noun;
    std::string landmark_color;
    CharSpan ambiguous_span;
    CharSpan unambiguous_span;

    bool operator==(const SlotRecord&) const = default;
};

struct InstructionEntry {
    int id = 0;
    ScenarioContext context;
    std::string ambiguous;
    std::string unambiguous;
    AmbiguityType ambiguity_type = AmbiguityType::Numerical;
    SlotRecord slots;

    bool operator==(const InstructionEntry&) const = default;
};

// The term each span must cover, per ambiguity type.
inline std::pair<std::string, std::string> substituted_terms(const InstructionEntry& e) {
    switch (e.ambiguity_type) {
        case AmbiguityType::Numerical:
            return {e.slots.quantity_vague.value_or(""), e.slots.quantity_precise};
        case AmbiguityType::AttributeNoun:
            return {e.slots.noun_substitute.value_or(""), e.slots.object_noun};
        case AmbiguityType::AttributeColor:
            return {e.slots.color_substitute.value_or(""), e.slots.object_color};
        case AmbiguityType::Spatial:
            return {e.slots.preposition_vague.value_or(""), e.slots.preposition_precise};
    }
    return {"", ""};
}

struct Vocabulary {
    std::vector<std::string> actions;
    std::vector<std::string> colors;
    std::vector<std::string> vague_quantities;
    std::vector<std::string> precise_quantities;
    std::vector<std::string> general_nouns;
    std::map<std::string, std::vector<std::string>> color_synonyms;
    std::vector<std::string> precise_prepositions;
    std::vector<std::string> vague_prepositions;

    static Vocabulary defaults() {
        Vocabulary v;
        v.actions = {"put", "place", "move"};
        v.colors = {"red", "yellow", "green"};
        v.vague_quantities = {"a few", "some", "several"};
        v.precise_quantities = {"a single", "two", "three", "all"};
        v.general_nouns = {"cube", "item", "thing", "object"};
        v.color_synonyms = {
            {"red", {"crimson", "cherry-colored", "scarlet"}},
            {"yellow", {"golden", "lemon-colored", "mustard"}},
            {"green", {"emerald", "lime-colored", "olive"}},
        };
        v.precise_prepositions = {"on", "to the left of", "to the right of", "in front of",
                                  "behind"};
        v.vague_prepositions = {"near", "close to", "next to", "lateral to",
                                "along the line of sight of"};
        return v;
    }

    void validate() const {
        auto require_nonempty = [](const std::vector<std::string>& list, const char* name) {
            if (list.empty()) throw SchemaError(std::string("vocabulary.") + name, "must be non-empty");
            for (const auto& s : list)
                if (s.empty())
                    throw SchemaError(std::string("vocabulary.") + name, "contains an empty string");
        };
        require_nonempty(actions, "actions");
        require_nonempty(colors, "colors");
        require_nonempty(vague_quantities, "vague_quantities");
        require_nonempty(precise_quantities, "precise_quantities");
        require_nonempty(general_nouns, "general_nouns");
        require_nonempty(precise_prepositions, "precise_prepositions");
        require_nonempty(vague_prepositions, "vague_prepositions");
        for (const auto& color : colors) {
            auto it = color_synonyms.find(color);
            if (it == color_synonyms.end() || it->second.empty())
                throw SchemaError("vocabulary.color_synonyms." + color,
                                  "every color needs at least one synonym");
        }
    }

    bool operator==(const Vocabulary&) const = default;
};

namespace detail {

inline std::vector<std::string> split_tokens(const std::string& s) {
    std::vector<std::string> tokens;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

// A substitute must not share its first or last token with the term it
// replaces; otherwise a maximal common-affix diff of the pair would shrink
// below the recorded span (e.g. "in front of" vs "along the line of sight of"
// both ending in "of").
inline bool boundary_tokens_distinct(const std::string& a, const std::string& b) {
    const auto ta = split_tokens(a);
    const auto tb = split_tokens(b);
    if (ta.empty() || tb.empty()) return false;
    return ta.front() != tb.front() && ta.back() != tb.back();
}

// Sentence assembled from space-joined parts; remembers where each part
// starts so spans are recorded rather than rediscovered by diffing.
struct SentenceBuilder {
    std::string text;

    CharSpan append(const std::string& part) {
        if (!text.empty()) text += ' ';
        const auto begin = static_cast<std::uint32_t>(text.size());
        text += part;
        return CharSpan{begin, static_cast<std::uint32_t>(text.size())};
    }
};

struct Landmark {
    std::string noun;
    std::string color;
};

// Candidates keep landmark != manipulated object: any bowl, or a block of a
// different color.
inline Landmark pick_landmark(SeededRng& rng, const ScenarioContext& ctx,
                              const std::string& object_color) {
    std::vector<Landmark> candidates;
    for (const auto& [color, count] : ctx.bowl_inventory)
        if (count > 0) candidates.push_back({"bowl", color});
    for (const auto& [color, count] : ctx.block_inventory)
        if (count > 0 && color != object_color) candidates.push_back({"block", color});
    if (candidates.empty())
        throw PreconditionError("scenario has no object usable as a distinct landmark");
    return candidates[rng.next_below(candidates.size())];
}

struct QuantityChoice {
    std::string phrase;
    int count = 1;
};

// Precise quantities that the inventory can satisfy. Numerical entries need
// the plural ones only: a vague term like "a few" forces a plural noun, so a
// singular precise counterpart would differ in two spans, not one.
inline std::vector<QuantityChoice> feasible_quantities(const Vocabulary& vocab, int available,
                                                       bool plural_only) {
    std::vector<QuantityChoice> out;
    for (const auto& q : vocab.precise_quantities) {
        if (q == "a single" || q == "one") {
            if (!plural_only && available >= 1) out.push_back({q, 1});
        } else if (q == "two") {
            if (available >= 2) out.push_back({q, 2});
        } else if (q == "three") {
            if (available >= 3) out.push_back({q, 3});
        } else if (q == "all") {
            if (available >= 2) out.push_back({q, available});
        }
    }
    return out;
}

inline std::vector<std::string> block_colors_with_at_least(const ScenarioContext& ctx, int n) {
    std::vector<std::string> colors;
    for (const auto& [color, count] : ctx.block_inventory)
        if (count >= n) colors.push_back(color);
    return colors;
}

struct PairBuild {
    std::string unambiguous;
    std::string ambiguous;
    CharSpan unambiguous_span;
    CharSpan ambiguous_span;
};

// Builds both sentences of a pair from shared parts, substituting exactly the
// part at `slot_index` and recording both spans.
inline PairBuild build_pair(const std::vector<std::string>& parts, std::size_t slot_index,
                            const std::string& substitute) {
    PairBuild out;
    SentenceBuilder precise;
    SentenceBuilder vague;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const CharSpan ps = precise.append(parts[i]);
        const CharSpan vs = vague.append(i == slot_index ? substitute : parts[i]);
        if (i == slot_index) {
            out.unambiguous_span = ps;
            out.ambiguous_span = vs;
        }
    }
    out.unambiguous = precise.text;
    out.ambiguous = vague.text;
    return out;
}

} // namespace detail

// Vague quantity in place of a precise one; everything else identical.
inline InstructionEntry generate_numerical(SeededRng& rng, const Vocabulary& vocab,
                                           const ScenarioContext& context) {
    const auto colors = detail::block_colors_with_at_least(context, 2);
    if (colors.empty())
        throw PreconditionError("numerical generation needs a block color with count >= 2");

    InstructionEntry entry;
    entry.context = context;
    entry.ambiguity_type = AmbiguityType::Numerical;

    SlotRecord& s = entry.slots;
    s.action = rng.pick(vocab.actions);
    s.object_color = colors[rng.next_below(colors.size())];
    s.object_noun = "block";

    const int available = context.block_inventory.at(s.object_color);
    const auto quantities = detail::feasible_quantities(vocab, available, /*plural_only=*/true);
    if (quantities.empty())
        throw VocabularyExhausted("no plural precise quantity fits an inventory of " +
                                  std::to_string(available));
    const auto qty = quantities[rng.next_below(quantities.size())];
    s.quantity_precise = qty.phrase;
    s.quantity_count = qty.count;

    std::vector<std::string> vague_ok;
    for (const auto& v : vocab.vague_quantities)
        if (detail::boundary_tokens_distinct(v, qty.phrase)) vague_ok.push_back(v);
    if (vague_ok.empty())
        throw VocabularyExhausted("no vague quantity is boundary-distinct from '" + qty.phrase + "'");
    s.quantity_vague = vague_ok[rng.next_below(vague_ok.size())];

    s.preposition_precise = rng.pick(vocab.precise_prepositions);
    const auto landmark = detail::pick_landmark(rng, context, s.object_color);
    s.landmark_noun = landmark.noun;
    s.landmark_color = landmark.color;

    const std::vector<std::string> parts = {
        s.action, s.quantity_precise, s.object_color, s.object_noun + "s",
        s.preposition_precise, "the", s.landmark_color, s.landmark_noun};
    const auto pair = detail::build_pair(parts, 1, *s.quantity_vague);
    entry.unambiguous = pair.unambiguous;
    entry.ambiguous = pair.ambiguous;
    s.unambiguous_span = pair.unambiguous_span;
    s.ambiguous_span = pair.ambiguous_span;
    return entry;
}

enum class AttributeSub { Noun, Color };

// General term in place of the object noun, or a color synonym in place of
// the color term. Quantity stays singular.
inline InstructionEntry generate_attribute(SeededRng& rng, const Vocabulary& vocab,
                                           const ScenarioContext& context, AttributeSub sub) {
    const auto colors = detail::block_colors_with_at_least(context, 1);
    if (colors.empty())
        throw PreconditionError("attribute generation needs at least one block");

    InstructionEntry entry;
    entry.context = context;
    entry.ambiguity_type =
        sub == AttributeSub::Noun ? AmbiguityType::AttributeNoun : AmbiguityType::AttributeColor;

    SlotRecord& s = entry.slots;
    s.action = rng.pick(vocab.actions);
    s.object_color = colors[rng.next_below(colors.size())];
    s.object_noun = "block";
    s.quantity_precise = "a single";
    s.quantity_count = 1;
    s.preposition_precise = rng.pick(vocab.precise_prepositions);
    const auto landmark = detail::pick_landmark(rng, context, s.object_color);
    s.landmark_noun = landmark.noun;
    s.landmark_color = landmark.color;

    std::string substitute;
    std::size_t slot_index = 0;
    if (sub == AttributeSub::Noun) {
        std::vector<std::string> nouns_ok;
        for (const auto& n : vocab.general_nouns)
            if (n != s.object_noun && detail::boundary_tokens_distinct(n, s.object_noun))
                nouns_ok.push_back(n);
        if (nouns_ok.empty())
            throw VocabularyExhausted("no general noun distinct from '" + s.object_noun + "'");
        substitute = nouns_ok[rng.next_below(nouns_ok.size())];
        s.noun_substitute = substitute;
        slot_index = 4; // [action, "a", "single", color, noun, ...]
    } else {
        auto it = vocab.color_synonyms.find(s.object_color);
        if (it == vocab.color_synonyms.end() || it->second.empty())
            throw VocabularyExhausted("no synonyms configured for color '" + s.object_color + "'");
        std::vector<std::string> syn_ok;
        for (const auto& c : it->second)
            if (detail::boundary_tokens_distinct(c, s.object_color)) syn_ok.push_back(c);
        if (syn_ok.empty())
            throw VocabularyExhausted("no boundary-distinct synonym for '" + s.object_color + "'");
        substitute = syn_ok[rng.next_below(syn_ok.size())];
        s.color_substitute = substitute;
        slot_index = 3;
    }

    // "a single" split in two parts keeps every part a whole token.
    const std::vector<std::string> parts = {
        s.action, "a", "single", s.object_color, s.object_noun,
        s.preposition_precise, "the", s.landmark_color, s.landmark_noun};
    const auto pair = detail::build_pair(parts, slot_index, substitute);
    entry.unambiguous = pair.unambiguous;
    entry.ambiguous = pair.ambiguous;
    s.unambiguous_span = pair.unambiguous_span;
    s.ambiguous_span = pair.ambiguous_span;
    return entry;
}

// Vague preposition in place of a precise one; objects and action identical.
inline InstructionEntry generate_spatial(SeededRng& rng, const Vocabulary& vocab,
                                         const ScenarioContext& context) {
    const auto colors = detail::block_colors_with_at_least(context, 1);
    if (colors.empty()) throw PreconditionError("spatial generation needs at least one block");

    InstructionEntry entry;
    entry.context = context;
    entry.ambiguity_type = AmbiguityType::Spatial;

    SlotRecord& s = entry.slots;
    s.action = rng.pick(vocab.actions);
    s.object_color = colors[rng.next_below(colors.size())];
    s.object_noun = "block";

    const int available = context.block_inventory.at(s.object_color);
    const auto quantities = detail::feasible_quantities(vocab, available, /*plural_only=*/false);
    if (quantities.empty())
        throw VocabularyExhausted("no precise quantity fits an inventory of " +
                                  std::to_string(available));
    const auto qty = quantities[rng.next_below(quantities.size())];
    s.quantity_precise = qty.phrase;
    s.quantity_count = qty.count;

    s.preposition_precise = rng.pick(vocab.precise_prepositions);
    std::vector<std::string> vague_ok;
    for (const auto& p : vocab.vague_prepositions)
        if (detail::boundary_tokens_distinct(p, s.preposition_precise)) vague_ok.push_back(p);
    if (vague_ok.empty())
        throw VocabularyExhausted("no vague preposition is boundary-distinct from '" +
                                  s.preposition_precise + "'");
    s.preposition_vague = vague_ok[rng.next_below(vague_ok.size())];

    const auto landmark = detail::pick_landmark(rng, context, s.object_color);
    s.landmark_noun = landmark.noun;
    s.landmark_color = landmark.color;

    const bool plural = qty.count > 1;
    std::vector<std::string> parts;
    std::size_t slot_index;
    if (s.quantity_precise == "a single") {
        parts = {s.action, "a", "single", s.object_color, s.object_noun,
                 s.preposition_precise, "the", s.landmark_color, s.landmark_noun};
        slot_index = 5;
    } else {
        parts = {s.action, s.quantity_precise, s.object_color,
                 s.object_noun + (plural ? "s" : ""),
                 s.preposition_precise, "the", s.landmark_color, s.landmark_noun};
        slot_index = 4;
    }
    const auto pair = detail::build_pair(parts, slot_index, *s.preposition_vague);
    entry.unambiguous = pair.unambiguous;
    entry.ambiguous = pair.ambiguous;
    s.unambiguous_span = pair.unambiguous_span;
    s.ambiguous_span = pair.ambiguous_span;
    return entry;
}

struct CategoryCounts {
    int numerical = 0;
    int attribute = 0;
    int spatial = 0;

    int total() const { return numerical + attribute + spatial; }
};

// Per-entry rejection-sampling budget before giving up on uniqueness.
inline constexpr int kUniquenessRetryBudget = 1000;

// Deterministic in (seed, counts, vocab, context). Ids are 1-based and
// assigned in generation order: numerical, attribute (noun/color
// alternating), spatial.
inline std::vector<InstructionEntry> generate_dataset(std::uint64_t seed,
                                                      const CategoryCounts& counts,
                                                      const Vocabulary& vocab,
                                                      const ScenarioContext& context) {
    if (counts.numerical < 0 || counts.attribute < 0 || counts.spatial < 0)
        throw PreconditionError("category counts must be >= 0");
    vocab.validate();

    SeededRng rng(seed);
    std::set<std::string> used;
    std::vector<InstructionEntry> out;
    out.reserve(static_cast<std::size_t>(counts.total()));

    auto emit_unique = [&](const std::string& what, auto&& make) {
        for (int attempt = 0; attempt < kUniquenessRetryBudget; ++attempt) {
            InstructionEntry entry = make();
            if (used.insert(entry.ambiguous).second) {
                entry.id = static_cast<int>(out.size()) + 1;
                out.push_back(std::move(entry));
                return;
            }
        }
        throw VocabularyExhausted("could not produce a distinct " + what + " instruction within " +
                                  std::to_string(kUniquenessRetryBudget) + " attempts");
    };

    for (int i = 0; i < counts.numerical; ++i)
        emit_unique("numerical", [&] { return generate_numerical(rng, vocab, context); });
    for (int i = 0; i < counts.attribute; ++i) {
        const AttributeSub sub = (i % 2 == 0) ? AttributeSub::Noun : AttributeSub::Color;
        emit_unique("attribute", [&] { return generate_attribute(rng, vocab, context, sub); });
    }
    for (int i = 0; i < counts.spatial; ++i)
        emit_unique("spatial", [&] { return generate_spatial(rng, vocab, context); });
    return out;
}

// ---- JSON (de)serialization --------------------------------------------

inline json to_json(const CharSpan& s) { return json::array({s.begin, s.end}); }

inline CharSpan span_from_json(const json& j, const std::string& path) {
    auto usable = [](const json& v) {
        return v.is_number_integer() && v.get<std::int64_t>() >= 0;
    };
    if (!j.is_array() || j.size() != 2 || !usable(j[0]) || !usable(j[1]))
        throw SchemaError(path, "expected [begin, end] with non-negative integers");
    return CharSpan{j[0].get<std::uint32_t>(), j[1].get<std::uint32_t>()};
}

inline json to_json(const ScenarioContext& ctx) {
    json j = json::object();
    j["description"] = ctx.description;
    j["block_inventory"] = ctx.block_inventory;
    j["bowl_inventory"] = ctx.bowl_inventory;
    return j;
}

inline ScenarioContext context_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected context object");
    ScenarioContext ctx;
    for (const char* key : {"description", "block_inventory", "bowl_inventory"})
        if (!j.contains(key)) throw SchemaError(path + "." + key, "missing field");
    ctx.description = j.at("description").get<std::string>();
    ctx.block_inventory = j.at("block_inventory").get<std::map<std::string, int>>();
    ctx.bowl_inventory = j.at("bowl_inventory").get<std::map<std::string, int>>();
    return ctx;
}

inline json to_json(const SlotRecord& s) {
    auto opt = [](const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); };
    json j = json::object();
    j["action"] = s.action;
    j["object_noun"] = s.object_noun;
    j["object_color"] = s.object_color;
    j["quantity_precise"] = s.quantity_precise;
    j["quantity_count"] = s.quantity_count;
    j["quantity_vague"] = opt(s.quantity_vague);
    j["noun_substitute"] = opt(s.noun_substitute);
    j["color_substitute"] = opt(s.color_substitute);
    j["preposition_precise"] = s.preposition_precise;
    j["preposition_vague"] = opt(s.preposition_vague);
    j["landmark_noun"] = s.landmark_noun;
    j["landmark_color"] = s.landmark_color;
    j["ambiguous_span"] = to_json(s.ambiguous_span);
    j["unambiguous_span"] = to_json(s.unambiguous_span);
    return j;
}

inline SlotRecord slots_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected slots object");
    SlotRecord s;
    auto req = [&](const char* key) -> const json& {
        if (!j.contains(key)) throw SchemaError(path + "." + key, "missing field");
        return j.at(key);
    };
    auto opt_str = [&](const char* key) -> std::optional<std::string> {
        if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
        if (!j.at(key).is_string()) throw SchemaError(path + "." + key, "expected string or null");
        return j.at(key).get<std::string>();
    };
    s.action = req("action").get<std::string>();
    s.object_noun = req("object_noun").get<std::string>();
    s.object_color = req("object_color").get<std::string>();
    s.quantity_precise = req("quantity_precise").get<std::string>();
    s.quantity_count = req("quantity_count").get<int>();
    s.quantity_vague = opt_str("quantity_vague");
    s.noun_substitute = opt_str("noun_substitute");
    s.color_substitute = opt_str("color_substitute");
    s.preposition_precise = req("preposition_precise").get<std::string>();
    s.preposition_vague = opt_str("preposition_vague");
    s.landmark_noun = req("landmark_noun").get<std::string>();
    s.landmark_color = req("landmark_color").get<std::string>();
    s.ambiguous_span = span_from_json(req("ambiguous_span"), path + ".ambiguous_span");
    s.unambiguous_span = span_from_json(req("unambiguous_span"), path + ".unambiguous_span");
    return s;
}

inline json to_json(const InstructionEntry& e) {
    json j = json::object();
    j["id"] = e.id;
    j["context"] = to_json(e.context);
    j["ambiguous_instruction"] = e.ambiguous;
    j["unambiguous_instruction"] = e.unambiguous;
    j["ambiguity_type"] = to_string(e.ambiguity_type);
    j["slots"] = to_json(e.slots);
    return j;
}

// Parses and validates one entry: spans must lie inside their instruction and
// cover exactly the substituted/original terms, and the active substitute
// must match the declared ambiguity type.
inline InstructionEntry entry_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected entry object");
    for (const char* key : {"id", "context", "ambiguous_instruction", "unambiguous_instruction",
                            "ambiguity_type", "slots"})
        if (!j.contains(key)) throw SchemaError(path + "." + key, "missing field");

    InstructionEntry e;
    e.id = j.at("id").get<int>();
    e.context = context_from_json(j.at("context"), path + ".context");
    e.ambiguous = j.at("ambiguous_instruction").get<std::string>();
    e.unambiguous = j.at("unambiguous_instruction").get<std::string>();
    e.ambiguity_type =
        ambiguity_type_from_string(j.at("ambiguity_type").get<std::string>(), path + ".ambiguity_type");
    e.slots = slots_from_json(j.at("slots"), path + ".slots");

    auto check_span = [&](const CharSpan& span, const std::string& text, const std::string& term,
                          const std::string& field) {
        if (span.begin > span.end)
            throw SchemaError(path + ".slots." + field, "span indices overlap (begin > end)");
        if (span.end > text.size())
            throw SchemaError(path + ".slots." + field, "span exceeds instruction length");
        if (text.substr(span.begin, span.length()) != term)
            throw SchemaError(path + ".slots." + field, "span does not cover the recorded term");
    };
    const auto [vague_term, precise_term] = substituted_terms(e);
    if (vague_term.empty())
        throw SchemaError(path + ".slots",
                          "no active substitute matches ambiguity_type " + to_string(e.ambiguity_type));
    const int active = (e.slots.quantity_vague ? 1 : 0) + (e.slots.noun_substitute ? 1 : 0) +
                       (e.slots.color_substitute ? 1 : 0) + (e.slots.preposition_vague ? 1 : 0);
    if (active != 1)
        throw SchemaError(path + ".slots", "exactly one substitute field must be set, found " +
                                               std::to_string(active));
    check_span(e.slots.ambiguous_span, e.ambiguous, vague_term, "ambiguous_span");
    check_span(e.slots.unambiguous_span, e.unambiguous, precise_term, "unambiguous_span");
    if (e.ambiguous == e.unambiguous)
        throw SchemaError(path, "ambiguous and unambiguous instructions are identical");
    return e;
}

inline json dataset_to_json(const std::vector<InstructionEntry>& entries) {
    json arr = json::array();
    for (const auto& e : entries) arr.push_back(to_json(e));
    return arr;
}

inline std::vector<InstructionEntry> dataset_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path, "expected a JSON array of entries");
    std::vector<InstructionEntry> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(entry_from_json(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline void write_dataset(const std::vector<InstructionEntry>& entries,
                          const std::filesystem::path& destination) {
    std::ofstream out(destination);
    if (!out) throw IoError("cannot open dataset file for writing: " + destination.string());
    out << dataset_to_json(entries).dump(2) << '\n';
    if (!out) throw IoError("failed while writing dataset file: " + destination.string());
}

inline std::vector<InstructionEntry> read_dataset(const std::filesystem::path& source) {
    std::ifstream in(source);
    if (!in) throw IoError("cannot open dataset file: " + source.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(source.string(), e.what());
    }
    return dataset_from_json(j, source.string());
}

// ---- Vocabulary file ------------------------------------------------------

inline json to_json(const Vocabulary& v) {
    json j = json::object();
    j["actions"] = v.actions;
    j["colors"] = v.colors;
    j["vague_quantities"] = v.vague_quantities;
    j["precise_quantities"] = v.precise_quantities;
    j["general_nouns"] = v.general_nouns;
    j["color_synonyms"] = v.color_synonyms;
    j["precise_prepositions"] = v.precise_prepositions;
    j["vague_prepositions"] = v.vague_prepositions;
    return j;
}

inline Vocabulary vocabulary_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected vocabulary object");
    Vocabulary v;
    auto req = [&](const char* key) -> const json& {
        if (!j.contains(key)) throw SchemaError(path + "." + key, "missing field");
        return j.at(key);
    };
    v.actions = req("actions").get<std::vector<std::string>>();
    v.colors = req("colors").get<std::vector<std::string>>();
    v.vague_quantities = req("vague_quantities").get<std::vector<std::string>>();
    v.precise_quantities = req("precise_quantities").get<std::vector<std::string>>();
    v.general_nouns = req("general_nouns").get<std::vector<std::string>>();
    v.color_synonyms = req("color_synonyms").get<std::map<std::string, std::vector<std::string>>>();
    v.precise_prepositions = req("precise_prepositions").get<std::vector<std::string>>();
    v.vague_prepositions = req("vague_prepositions").get<std::vector<std::string>>();
    v.validate();
    return v;
}

inline Vocabulary read_vocabulary(const std::filesystem::path& source) {
    std::ifstream in(source);
    if (!in) throw IoError("cannot open vocabulary file: " + source.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(source.string(), e.what());
    }
    return vocabulary_from_json(j, source.string());
}

} // namespace ambidebate
