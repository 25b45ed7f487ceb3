#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ambidebate/dataset.hpp"
#include "ambidebate/errors.hpp"
#include "ambidebate/types.hpp"

namespace ambidebate {

// Prompt text lives in editable files; these are the shipped defaults. Keys
// in braces are substituted at build time: {context}, {instruction},
// {proposal}, {feedback}, {sentence_limit}.
struct PromptTemplates {
    std::string baseline_system;
    std::string baseline_user;
    std::string leader_system;
    std::string leader_user_round1;
    std::string leader_user_revision;
    std::string follower_system;
    std::string follower_user;

    static PromptTemplates defaults() {
        PromptTemplates t;
        t.baseline_system =
            "You are the language interface of a tabletop robot arm. The robot can only "
            "execute an instruction when it is fully specified. Read the scene description "
            "and the instruction, then decide whether the instruction can be executed "
            "exactly as written.\n"
            "\n"
            "Respond with the following two markers, each starting its own line:\n"
            "REASONING: your analysis, at most {sentence_limit} sentences.\n"
            "VERDICT: CLEAR if the instruction is unambiguous, or QUESTION: followed by "
            "the single clarifying question you would ask the operator.\n";
        t.baseline_user =
            "Scene: {context}\n"
            "\n"
            "Instruction: {instruction}\n"
            "\n"
            "Is this instruction clear enough to execute, or do you need to ask a "
            "clarifying question first?\n";
        t.leader_system =
            "You are the lead agent of a panel that reviews instructions given to a "
            "tabletop robot arm. You propose a verdict on the instruction and two "
            "follower agents critique your proposal. The robot can only execute an "
            "instruction when it is fully specified.\n"
            "\n"
            "Respond with the following two markers, each starting its own line:\n"
            "REASONING: your analysis, at most {sentence_limit} sentences.\n"
            "VERDICT: CLEAR if the instruction is unambiguous, or QUESTION: followed by "
            "the single clarifying question you would ask the operator.\n";
        t.leader_user_round1 =
            "Scene: {context}\n"
            "\n"
            "Instruction: {instruction}\n"
            "\n"
            "Propose your verdict: is the instruction clear enough to execute, or should "
            "the operator be asked a clarifying question first?\n";
        t.leader_user_revision =
            "Scene: {context}\n"
            "\n"
            "Instruction: {instruction}\n"
            "\n"
            "Your previous proposal did not reach consensus. The followers responded:\n"
            "\n"
            "{feedback}\n"
            "\n"
            "Weigh their objections and propose a revised verdict, using the same "
            "REASONING and VERDICT markers as before.\n";
        t.follower_system =
            "You are a follower agent on a panel that reviews instructions given to a "
            "tabletop robot arm. The lead agent has proposed a verdict on the "
            "instruction below; judge the proposal independently. The robot can only "
            "execute an instruction when it is fully specified.\n"
            "\n"
            "Respond with the following markers, each starting its own line:\n"
            "REASONING: your assessment, at most {sentence_limit} sentences.\n"
            "STANCE: AGREE if you accept the proposal as it stands, DISAGREE otherwise.\n"
            "ALT_QUESTION: only when you disagree, the clarifying question you would ask "
            "instead. Omit this line when you have none.\n";
        t.follower_user =
            "Scene: {context}\n"
            "\n"
            "Instruction: {instruction}\n"
            "\n"
            "Leader proposal:\n"
            "{proposal}\n"
            "\n"
            "State whether you agree with this proposal.\n";
        return t;
    }

    // filename, member pointer
    static const std::vector<std::pair<std::string, std::string PromptTemplates::*>>& files() {
        static const std::vector<std::pair<std::string, std::string PromptTemplates::*>> table = {
            {"baseline_system.txt", &PromptTemplates::baseline_system},
            {"baseline_user.txt", &PromptTemplates::baseline_user},
            {"leader_system.txt", &PromptTemplates::leader_system},
            {"leader_user_round1.txt", &PromptTemplates::leader_user_round1},
            {"leader_user_revision.txt", &PromptTemplates::leader_user_revision},
            {"follower_system.txt", &PromptTemplates::follower_system},
            {"follower_user.txt", &PromptTemplates::follower_user},
        };
        return table;
    }

    static PromptTemplates load_from_directory(const std::filesystem::path& dir) {
        PromptTemplates t;
        for (const auto& [name, member] : files()) {
            const auto path = dir / name;
            std::ifstream in(path);
            if (!in) throw IoError("cannot open template file: " + path.string());
            std::ostringstream buf;
            buf << in.rdbuf();
            t.*member = buf.str();
        }
        return t;
    }

    void save_to_directory(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        for (const auto& [name, member] : files()) {
            const auto path = dir / name;
            std::ofstream out(path);
            if (!out) throw IoError("cannot open template file for writing: " + path.string());
            out << this->*member;
        }
    }

    bool operator==(const PromptTemplates&) const = default;
};

// Replaces every "{key}" occurrence for the keys given; unknown braces pass
// through untouched so templates may contain literal braces.
inline std::string render_template(const std::string& tpl,
                                   const std::map<std::string, std::string>& values) {
    std::string out = tpl;
    for (const auto& [key, value] : values) {
        const std::string needle = "{" + key + "}";
        std::size_t pos = 0;
        while ((pos = out.find(needle, pos)) != std::string::npos) {
            out.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    return out;
}

inline std::string render_proposal_block(const Proposal& proposal) {
    std::string out;
    if (proposal.verdict.is_question()) {
        out = "The leader proposes to ask the operator: \"" + proposal.verdict.question + "\"";
    } else {
        out = "The leader declares the instruction clear and executable as written.";
    }
    if (!proposal.reasoning.empty()) out += "\nLeader reasoning: " + proposal.reasoning;
    return out;
}

inline std::string render_feedback_block(const std::vector<FollowerFeedback>& feedback) {
    std::string out;
    for (std::size_t i = 0; i < feedback.size(); ++i) {
        const auto& f = feedback[i];
        if (i > 0) out += "\n\n";
        out += "Follower " + std::to_string(i + 1) + ": " + (f.agrees() ? "AGREE" : "DISAGREE");
        if (!f.reasoning.empty()) out += "\nReasoning: " + f.reasoning;
        if (f.alternative_question)
            out += "\nAlternative question: " + *f.alternative_question;
    }
    return out;
}

inline PromptBundle build_baseline_prompt(const PromptTemplates& templates,
                                          const InstructionEntry& entry,
                                          const AgentConfig& agent) {
    PromptBundle b;
    b.entry_id = entry.id;
    b.role = Role::Baseline;
    b.round_index = 1;
    b.system_text = render_template(
        templates.baseline_system,
        {{"sentence_limit", std::to_string(agent.reasoning_sentence_limit)}});
    b.user_text = render_template(templates.baseline_user,
                                  {{"context", entry.context.description},
                                   {"instruction", entry.ambiguous}});
    return b;
}

inline PromptBundle build_leader_prompt(
    const PromptTemplates& templates, const InstructionEntry& entry, const AgentConfig& agent,
    int round, const std::optional<std::vector<FollowerFeedback>>& prior_feedback) {
    if (round < 1) throw PreconditionError("round index must be >= 1");
    if (round > 1 && !prior_feedback)
        throw PreconditionError("a revision round needs the previous follower feedback");

    PromptBundle b;
    b.entry_id = entry.id;
    b.role = Role::Leader;
    b.round_index = round;
    b.system_text = render_template(
        templates.leader_system,
        {{"sentence_limit", std::to_string(agent.reasoning_sentence_limit)}});
    if (round == 1) {
        b.user_text = render_template(templates.leader_user_round1,
                                      {{"context", entry.context.description},
                                       {"instruction", entry.ambiguous}});
    } else {
        b.prior_feedback = *prior_feedback;
        b.user_text = render_template(templates.leader_user_revision,
                                      {{"context", entry.context.description},
                                       {"instruction", entry.ambiguous},
                                       {"feedback", render_feedback_block(*prior_feedback)}});
    }
    return b;
}

inline PromptBundle build_follower_prompt(const PromptTemplates& templates,
                                          const InstructionEntry& entry,
                                          const AgentConfig& agent, const Proposal& proposal,
                                          int round) {
    if (round < 1) throw PreconditionError("round index must be >= 1");
    PromptBundle b;
    b.entry_id = entry.id;
    b.role = Role::Follower;
    b.round_index = round;
    b.leader_proposal = proposal;
    b.system_text = render_template(
        templates.follower_system,
        {{"sentence_limit", std::to_string(agent.reasoning_sentence_limit)}});
    b.user_text = render_template(templates.follower_user,
                                  {{"context", entry.context.description},
                                   {"instruction", entry.ambiguous},
                                   {"proposal", render_proposal_block(proposal)}});
    return b;
}

} // namespace ambidebate
