#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <ambidebate/dataset.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

using namespace ambidebate;

namespace {

struct Token {
    std::string text;
    std::size_t begin = 0;
    std::size_t end = 0;
};

std::vector<Token> tokenize(const std::string& s) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && s[i] == ' ') ++i;
        if (i >= s.size()) break;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ') ++j;
        tokens.push_back({s.substr(i, j - i), i, j});
        i = j;
    }
    return tokens;
}

// Independent reconstruction of the substituted region: strip the longest
// common token prefix and suffix of the pair, then map what remains back to
// character offsets. Compared against the spans the generator recorded.
struct DiffSpans {
    CharSpan a;
    CharSpan b;
};

DiffSpans token_diff(const std::string& a, const std::string& b) {
    const auto ta = tokenize(a);
    const auto tb = tokenize(b);
    const std::size_t min_len = std::min(ta.size(), tb.size());

    std::size_t prefix = 0;
    while (prefix < min_len && ta[prefix].text == tb[prefix].text) ++prefix;
    std::size_t suffix = 0;
    while (suffix < min_len - prefix &&
           ta[ta.size() - 1 - suffix].text == tb[tb.size() - 1 - suffix].text)
        ++suffix;

    auto span_of = [](const std::vector<Token>& tokens, std::size_t from, std::size_t to) {
        REQUIRE(from < to); // a pure substitution never produces an empty side
        return CharSpan{static_cast<std::uint32_t>(tokens[from].begin),
                        static_cast<std::uint32_t>(tokens[to - 1].end)};
    };
    return {span_of(ta, prefix, ta.size() - suffix), span_of(tb, prefix, tb.size() - suffix)};
}

std::string slice(const std::string& s, const CharSpan& span) {
    return s.substr(span.begin, span.length());
}

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "ambidebate_dataset_test";
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("default scene inventories match its description") {
    const auto scene = ScenarioContext::default_scene();
    CHECK(scene.block_inventory == std::map<std::string, int>{
                                       {"green", 3}, {"red", 3}, {"yellow", 3}});
    CHECK(scene.bowl_inventory == std::map<std::string, int>{
                                      {"green", 1}, {"red", 1}, {"yellow", 1}});
    CHECK(description_is_faithful(scene));
    CHECK(scene.description.find("three red blocks") != std::string::npos);
    CHECK(scene.description.find("one green bowl") != std::string::npos);
}

TEST_CASE("a sixty entry dataset holds the pair contract on every entry") {
    const auto vocab = Vocabulary::defaults();
    const auto scene = ScenarioContext::default_scene();
    const auto dataset = generate_dataset(20250816, {20, 20, 20}, vocab, scene);

    REQUIRE(dataset.size() == 60);

    std::set<std::string> ambiguous_texts;
    int numerical = 0, attr_noun = 0, attr_color = 0, spatial = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& e = dataset[i];
        CAPTURE(e.id);
        CAPTURE(e.ambiguous);
        CAPTURE(e.unambiguous);

        CHECK(e.id == static_cast<int>(i) + 1);
        CHECK(e.context == scene);
        CHECK(ambiguous_texts.insert(e.ambiguous).second);
        CHECK(e.ambiguous != e.unambiguous);

        switch (e.ambiguity_type) {
            case AmbiguityType::Numerical: ++numerical; break;
            case AmbiguityType::AttributeNoun: ++attr_noun; break;
            case AmbiguityType::AttributeColor: ++attr_color; break;
            case AmbiguityType::Spatial: ++spatial; break;
        }

        // spans cover exactly the recorded terms
        const auto [vague_term, precise_term] = substituted_terms(e);
        CHECK(slice(e.ambiguous, e.slots.ambiguous_span) == vague_term);
        CHECK(slice(e.unambiguous, e.slots.unambiguous_span) == precise_term);

        // and the recorded spans agree with a diff computed from scratch
        const auto diff = token_diff(e.unambiguous, e.ambiguous);
        CHECK(diff.a == e.slots.unambiguous_span);
        CHECK(diff.b == e.slots.ambiguous_span);

        // exactly one substitute field is active
        const int active = (e.slots.quantity_vague ? 1 : 0) + (e.slots.noun_substitute ? 1 : 0) +
                           (e.slots.color_substitute ? 1 : 0) +
                           (e.slots.preposition_vague ? 1 : 0);
        CHECK(active == 1);

        // the landmark is never the manipulated object
        const bool landmark_distinct =
            e.slots.landmark_noun != e.slots.object_noun ||
            e.slots.landmark_color != e.slots.object_color;
        CHECK(landmark_distinct);
        CHECK(scene.bowl_inventory.count(e.slots.landmark_color) == 1);

        // requested quantities stay satisfiable
        const int available = scene.block_inventory.at(e.slots.object_color);
        CHECK(e.slots.quantity_count >= 1);
        CHECK(e.slots.quantity_count <= available);
        if (e.slots.quantity_precise == "all") CHECK(e.slots.quantity_count == available);
        if (e.ambiguity_type == AmbiguityType::Numerical) CHECK(e.slots.quantity_count >= 2);

        CHECK(std::none_of(e.ambiguous.begin(), e.ambiguous.end(), [](unsigned char c) {
            return std::isupper(c) != 0;
        }));
        CHECK(e.ambiguous.back() != '.');
    }
    CHECK(numerical == 20);
    CHECK(attr_noun == 10);
    CHECK(attr_color == 10);
    CHECK(spatial == 20);
}

TEST_CASE("generation is a pure function of the seed") {
    const auto vocab = Vocabulary::defaults();
    const auto scene = ScenarioContext::default_scene();
    const auto a = generate_dataset(99, {8, 8, 8}, vocab, scene);
    const auto b = generate_dataset(99, {8, 8, 8}, vocab, scene);
    CHECK(a == b);

    const auto c = generate_dataset(100, {8, 8, 8}, vocab, scene);
    const bool differs = !std::equal(a.begin(), a.end(), c.begin(), c.end(),
                                     [](const InstructionEntry& x, const InstructionEntry& y) {
                                         return x.ambiguous == y.ambiguous;
                                     });
    CHECK(differs);
}

TEST_CASE("frozen seed reproduces the canonical quantity pair") {
    SeededRng rng(2504);
    const auto e =
        generate_numerical(rng, Vocabulary::defaults(), ScenarioContext::default_scene());
    CHECK(e.unambiguous == "put two red blocks to the left of the green bowl");
    CHECK(e.ambiguous == "put a few red blocks to the left of the green bowl");
    CHECK(e.slots.quantity_precise == "two");
    CHECK(e.slots.quantity_count == 2);
    CHECK(e.slots.quantity_vague == "a few");
    CHECK(slice(e.unambiguous, e.slots.unambiguous_span) == "two");
    CHECK(slice(e.ambiguous, e.slots.ambiguous_span) == "a few");
}

TEST_CASE("an all quantity resolves to the full inventory count") {
    SeededRng rng(30);
    const auto e =
        generate_numerical(rng, Vocabulary::defaults(), ScenarioContext::default_scene());
    CHECK(e.unambiguous == "place all green blocks on the yellow bowl");
    CHECK(e.ambiguous == "place some green blocks on the yellow bowl");
    CHECK(e.slots.quantity_precise == "all");
    CHECK(e.slots.quantity_count == 3);
}

TEST_CASE("attribute entries alternate noun and color substitution") {
    const auto dataset = generate_dataset(7, {0, 4, 0}, Vocabulary::defaults(),
                                          ScenarioContext::default_scene());
    REQUIRE(dataset.size() == 4);
    CHECK(dataset[0].ambiguity_type == AmbiguityType::AttributeNoun);
    CHECK(dataset[1].ambiguity_type == AmbiguityType::AttributeColor);
    CHECK(dataset[2].ambiguity_type == AmbiguityType::AttributeNoun);
    CHECK(dataset[3].ambiguity_type == AmbiguityType::AttributeColor);

    for (const auto& e : dataset) {
        CHECK(e.slots.quantity_precise == "a single");
        CHECK(e.slots.quantity_count == 1);
        if (e.ambiguity_type == AmbiguityType::AttributeNoun) {
            REQUIRE(e.slots.noun_substitute.has_value());
            CHECK(e.ambiguous.find(*e.slots.noun_substitute) != std::string::npos);
        } else {
            REQUIRE(e.slots.color_substitute.has_value());
            const auto& synonyms =
                Vocabulary::defaults().color_synonyms.at(e.slots.object_color);
            CHECK(std::find(synonyms.begin(), synonyms.end(), *e.slots.color_substitute) !=
                  synonyms.end());
        }
    }
}

TEST_CASE("substitute phrases never share a boundary token with what they replace") {
    const auto dataset = generate_dataset(123, {15, 15, 15}, Vocabulary::defaults(),
                                          ScenarioContext::default_scene());
    for (const auto& e : dataset) {
        const auto [vague_term, precise_term] = substituted_terms(e);
        const auto tv = tokenize(vague_term);
        const auto tp = tokenize(precise_term);
        REQUIRE(!tv.empty());
        REQUIRE(!tp.empty());
        CHECK(tv.front().text != tp.front().text);
        CHECK(tv.back().text != tp.back().text);
    }
}

TEST_CASE("a vague quantity that collides with the precise one exhausts the vocabulary") {
    auto vocab = Vocabulary::defaults();
    vocab.precise_quantities = {"two"};
    vocab.vague_quantities = {"two of"}; // shares its first token with "two"
    CHECK_THROWS_AS(
        generate_dataset(1, {1, 0, 0}, vocab, ScenarioContext::default_scene()),
        VocabularyExhausted);
}

TEST_CASE("asking for more distinct entries than the vocabulary allows fails loudly") {
    auto vocab = Vocabulary::defaults();
    vocab.actions = {"put"};
    vocab.vague_quantities = {"a few"};
    vocab.precise_quantities = {"two"};
    vocab.precise_prepositions = {"on"};
    ScenarioContext scene;
    scene.block_inventory = {{"red", 3}};
    scene.bowl_inventory = {{"green", 1}};
    scene.description = ScenarioContext::render_description(scene.block_inventory,
                                                            scene.bowl_inventory);
    // only one numerical sentence is expressible here
    CHECK_NOTHROW(generate_dataset(1, {1, 0, 0}, vocab, scene));
    try {
        generate_dataset(1, {2, 0, 0}, vocab, scene);
        FAIL("expected VocabularyExhausted");
    } catch (const VocabularyExhausted& e) {
        CHECK(std::string(e.what()).find("distinct") != std::string::npos);
    }
}

TEST_CASE("dataset files round-trip") {
    const auto dataset = generate_dataset(5, {3, 3, 3}, Vocabulary::defaults(),
                                          ScenarioContext::default_scene());
    const auto path = temp_dir() / "roundtrip.json";
    write_dataset(dataset, path);
    const auto loaded = read_dataset(path);
    CHECK(loaded == dataset);
}

TEST_CASE("schema violations name the offending field") {
    const auto dataset = generate_dataset(5, {2, 0, 0}, Vocabulary::defaults(),
                                          ScenarioContext::default_scene());
    json j = dataset_to_json(dataset);

    SUBCASE("missing slot field") {
        j[1]["slots"].erase("action");
        try {
            dataset_from_json(j, "dataset");
            FAIL("expected SchemaError");
        } catch (const SchemaError& e) {
            CHECK(e.path() == "dataset[1].slots.action");
        }
    }
    SUBCASE("span that does not cover its term") {
        j[0]["slots"]["ambiguous_span"][0] = j[0]["slots"]["ambiguous_span"][0].get<int>() + 1;
        try {
            dataset_from_json(j, "dataset");
            FAIL("expected SchemaError");
        } catch (const SchemaError& e) {
            CHECK(e.path() == "dataset[0].slots.ambiguous_span");
            CHECK(std::string(e.what()).find("cover") != std::string::npos);
        }
    }
    SUBCASE("unknown ambiguity type") {
        j[0]["ambiguity_type"] = "temporal";
        CHECK_THROWS_AS(dataset_from_json(j, "dataset"), SchemaError);
    }
    SUBCASE("identical pair text") {
        j[0]["ambiguous_instruction"] = j[0]["unambiguous_instruction"];
        // keep the span consistent with the edited text so the pair check fires
        j[0]["slots"]["ambiguous_span"] = j[0]["slots"]["unambiguous_span"];
        json& slots = j[0]["slots"];
        slots["quantity_vague"] = slots["quantity_precise"];
        CHECK_THROWS_AS(dataset_from_json(j, "dataset"), SchemaError);
    }
}

TEST_CASE("vocabulary files round-trip and get validated") {
    const auto path = temp_dir() / "vocab.json";
    {
        std::ofstream out(path);
        out << to_json(Vocabulary::defaults()).dump(2);
    }
    CHECK(read_vocabulary(path) == Vocabulary::defaults());

    auto broken = to_json(Vocabulary::defaults());
    broken["color_synonyms"].erase("red");
    try {
        vocabulary_from_json(broken, "vocab");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.path()).find("color_synonyms") != std::string::npos);
    }
}
