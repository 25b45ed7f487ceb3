#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <ambidebate/parsing.hpp>
#include <ambidebate/prompts.hpp>

#include <string>

using namespace ambidebate;

namespace {

InstructionEntry sample_entry() {
    SeededRng rng(2504);
    return generate_numerical(rng, Vocabulary::defaults(), ScenarioContext::default_scene());
}

AgentConfig sample_agent() {
    AgentConfig agent;
    agent.model_name = "test-model";
    return agent;
}

} // namespace

TEST_CASE("the template files in the repository match the built-in defaults") {
    const auto shipped = PromptTemplates::load_from_directory(
        std::filesystem::path(AMBIDEBATE_SOURCE_DIR) / "templates");
    CHECK(shipped == PromptTemplates::defaults());
}

TEST_CASE("templates survive a save and load cycle") {
    const auto dir = std::filesystem::temp_directory_path() / "ambidebate_templates_test";
    PromptTemplates::defaults().save_to_directory(dir);
    CHECK(PromptTemplates::load_from_directory(dir) == PromptTemplates::defaults());
    CHECK_THROWS_AS(PromptTemplates::load_from_directory(dir / "nonexistent"), IoError);
}

TEST_CASE("placeholder substitution replaces every occurrence and nothing else") {
    CHECK(render_template("{a} and {a} but {b} and {unknown}",
                          {{"a", "one"}, {"b", "two"}}) == "one and one but two and {unknown}");
    CHECK(render_template("no placeholders", {{"a", "x"}}) == "no placeholders");
}

TEST_CASE("baseline prompts carry the scene, the instruction, and the sentence cap") {
    const auto entry = sample_entry();
    auto agent = sample_agent();
    agent.reasoning_sentence_limit = 4;
    const auto bundle = build_baseline_prompt(PromptTemplates::defaults(), entry, agent);

    CHECK(bundle.role == Role::Baseline);
    CHECK(bundle.entry_id == entry.id);
    CHECK(bundle.system_text.find("at most 4 sentences") != std::string::npos);
    CHECK(bundle.user_text.find(entry.context.description) != std::string::npos);
    CHECK(bundle.user_text.find(entry.ambiguous) != std::string::npos);
    // the resolved twin must never leak into the prompt
    CHECK(bundle.user_text.find(entry.unambiguous) == std::string::npos);
    CHECK(bundle.system_text.find('{') == std::string::npos);
}

TEST_CASE("leader prompts differ between the opening round and a revision") {
    const auto entry = sample_entry();
    const auto agent = sample_agent();
    const auto templates = PromptTemplates::defaults();

    const auto opening = build_leader_prompt(templates, entry, agent, 1, std::nullopt);
    CHECK(opening.round_index == 1);
    CHECK(opening.user_text.find("previous proposal") == std::string::npos);

    FollowerFeedback objection;
    objection.stance = FollowerFeedback::Stance::Disagree;
    objection.reasoning = "The quantity stays open.";
    objection.alternative_question = "How many blocks do you want moved?";
    FollowerFeedback nod;
    nod.stance = FollowerFeedback::Stance::Agree;
    nod.reasoning = "Looks right to me.";

    const auto revision = build_leader_prompt(templates, entry, agent, 2,
                                              std::vector<FollowerFeedback>{objection, nod});
    CHECK(revision.round_index == 2);
    CHECK(revision.user_text.find("Follower 1: DISAGREE") != std::string::npos);
    CHECK(revision.user_text.find("Follower 2: AGREE") != std::string::npos);
    CHECK(revision.user_text.find("How many blocks do you want moved?") != std::string::npos);
    REQUIRE(revision.prior_feedback.size() == 2);
    CHECK_FALSE(revision.prior_feedback[0].agrees());

    CHECK_THROWS_AS(build_leader_prompt(templates, entry, agent, 2, std::nullopt),
                    PreconditionError);
    CHECK_THROWS_AS(build_leader_prompt(templates, entry, agent, 0, std::nullopt),
                    PreconditionError);
}

TEST_CASE("follower prompts quote the proposal they are judging") {
    const auto entry = sample_entry();
    const auto agent = sample_agent();
    const auto templates = PromptTemplates::defaults();

    Proposal question_proposal;
    question_proposal.reasoning = "The amount is unclear.";
    question_proposal.verdict = Verdict::ask("How many red blocks should I move?");
    const auto asking =
        build_follower_prompt(templates, entry, agent, question_proposal, 1);
    CHECK(asking.role == Role::Follower);
    CHECK(asking.user_text.find("\"How many red blocks should I move?\"") != std::string::npos);
    CHECK(asking.user_text.find("The amount is unclear.") != std::string::npos);
    REQUIRE(asking.leader_proposal.has_value());
    CHECK(asking.leader_proposal->verdict.is_question());

    Proposal clear_proposal;
    clear_proposal.reasoning = "Everything is specified.";
    clear_proposal.verdict = Verdict::clear();
    const auto declaring = build_follower_prompt(templates, entry, agent, clear_proposal, 1);
    CHECK(declaring.user_text.find("clear and executable") != std::string::npos);
}

TEST_CASE("feedback blocks omit what a follower did not say") {
    FollowerFeedback bare;
    bare.stance = FollowerFeedback::Stance::Disagree;
    const std::string block = render_feedback_block({bare});
    CHECK(block == "Follower 1: DISAGREE");
}

TEST_CASE("proposal responses parse when the markers are well-formed") {
    const auto p = parse_proposal(
        "REASONING: The instruction says a few, which is not a number.\n"
        "VERDICT: QUESTION: How many red blocks should I move?");
    CHECK(p.reasoning == "The instruction says a few, which is not a number.");
    REQUIRE(p.verdict.is_question());
    CHECK(p.verdict.question == "How many red blocks should I move?");

    const auto clear = parse_proposal("REASONING: All referents are unique.\nVERDICT: CLEAR");
    CHECK_FALSE(clear.verdict.is_question());
}

TEST_CASE("chatter around the markers is tolerated") {
    const auto p = parse_proposal(
        "Sure, happy to help! Here is my assessment.\n"
        "\n"
        "reasoning: The phrase is vague.\n"
        "Verdict: Question: How many blocks\n"
        "should I move?\n"
        "Let me know if you need anything else.");
    REQUIRE(p.verdict.is_question());
    // continuation lines fold into the question
    CHECK(p.verdict.question ==
          "How many blocks should I move? Let me know if you need anything else.");
    CHECK(p.reasoning == "The phrase is vague.");

    const auto clear = parse_proposal("VERDICT: CLEAR\nHope that helps!");
    CHECK_FALSE(clear.verdict.is_question());
    CHECK(clear.reasoning.empty());
}

TEST_CASE("bullets and carriage returns do not hide a marker") {
    const auto p = parse_proposal("- REASONING: Fine.\r\n- VERDICT: CLEAR.\r\n");
    CHECK_FALSE(p.verdict.is_question());
    CHECK(p.reasoning == "Fine.");
}

TEST_CASE("malformed proposals are rejected") {
    CHECK_THROWS_AS(parse_proposal("I think it is fine."), ParseError);
    CHECK_THROWS_AS(parse_proposal("VERDICT: CLEAR\nVERDICT: CLEAR"), ParseError);
    CHECK_THROWS_AS(parse_proposal("VERDICT: QUESTION:"), ParseError);
    CHECK_THROWS_AS(parse_proposal("VERDICT: QUESTION"), ParseError);
    CHECK_THROWS_AS(parse_proposal("VERDICT: maybe"), ParseError);
    CHECK_THROWS_AS(parse_proposal("VERDICT: CLEARLY"), ParseError);
    // a follower marker has no business in a proposal
    CHECK_THROWS_AS(parse_proposal("STANCE: AGREE\nVERDICT: CLEAR"), ParseError);
}

TEST_CASE("feedback responses parse both stances") {
    const auto agree = parse_feedback("REASONING: Sound proposal.\nSTANCE: AGREE");
    CHECK(agree.agrees());
    CHECK(agree.reasoning == "Sound proposal.");
    CHECK_FALSE(agree.alternative_question.has_value());

    const auto disagree = parse_feedback(
        "REASONING: The question targets the wrong slot.\n"
        "STANCE: DISAGREE\n"
        "ALT_QUESTION: Which bowl do you mean?");
    CHECK_FALSE(disagree.agrees());
    REQUIRE(disagree.alternative_question.has_value());
    CHECK(*disagree.alternative_question == "Which bowl do you mean?");
}

TEST_CASE("stance keywords match on the first word only") {
    CHECK(parse_feedback("STANCE: AGREE with the leader").agrees());
    CHECK_FALSE(parse_feedback("STANCE: Disagree.").agrees());
    CHECK_THROWS_AS(parse_feedback("STANCE: AGREEABLE"), ParseError);
    CHECK_THROWS_AS(parse_feedback("STANCE: kind of"), ParseError);
}

TEST_CASE("malformed feedback is rejected") {
    CHECK_THROWS_AS(parse_feedback("REASONING: no stance given"), ParseError);
    CHECK_THROWS_AS(parse_feedback("STANCE: AGREE\nSTANCE: AGREE"), ParseError);
    CHECK_THROWS_AS(parse_feedback("VERDICT: CLEAR\nSTANCE: AGREE"), ParseError);
    // agreeing while proposing a different question is contradictory
    CHECK_THROWS_AS(
        parse_feedback("STANCE: AGREE\nALT_QUESTION: Which bowl do you mean?"), ParseError);
}

TEST_CASE("an empty alternative question is treated as absent") {
    const auto f = parse_feedback("STANCE: DISAGREE\nALT_QUESTION:");
    CHECK_FALSE(f.alternative_question.has_value());
}

TEST_CASE("rendered structured output round-trips through the parsers") {
    Proposal p;
    p.reasoning = "The target bowl is named explicitly.";
    p.verdict = Verdict::ask("Which side of the bowl?");
    const auto p2 = parse_proposal(render_proposal_text(p));
    CHECK(p2.reasoning == p.reasoning);
    CHECK(p2.verdict.is_question());
    CHECK(p2.verdict.question == p.verdict.question);

    FollowerFeedback f;
    f.stance = FollowerFeedback::Stance::Disagree;
    f.reasoning = "The leader ignored the quantity.";
    f.alternative_question = "How many blocks?";
    const auto f2 = parse_feedback(render_feedback_text(f));
    CHECK(f2.stance == f.stance);
    CHECK(f2.reasoning == f.reasoning);
    CHECK(f2.alternative_question == f.alternative_question);

    Proposal clear;
    clear.verdict = Verdict::clear();
    CHECK_FALSE(parse_proposal(render_proposal_text(clear)).verdict.is_question());
}
