#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ambidebate/errors.hpp"

namespace ambidebate {

// Insertion-ordered JSON everywhere: the file formats promise stable key
// order so that reruns are byte-comparable.
using json = nlohmann::ordered_json;

enum class Role { Baseline, Leader, Follower };

inline std::string to_string(Role r) {
    switch (r) {
        case Role::Baseline: return "baseline";
        case Role::Leader: return "leader";
        case Role::Follower: return "follower";
    }
    return "unknown";
}

// Generation parameters shared by every agent in a run.
struct AgentConfig {
    std::string model_name;
    double temperature = 0.5;
    int max_tokens = 350;
    int reasoning_sentence_limit = 4;

    void validate() const {
        if (temperature < 0.0 || temperature > 2.0)
            throw SchemaError("agent.temperature", "must be in [0,2]");
        if (max_tokens < 1) throw SchemaError("agent.max_tokens", "must be >= 1");
        if (reasoning_sentence_limit < 1)
            throw SchemaError("agent.sentence_limit", "must be >= 1");
    }

    bool operator==(const AgentConfig&) const = default;
};

struct Verdict {
    enum class Kind { Clear, Question };

    Kind kind = Kind::Clear;
    std::string question; // non-empty iff kind == Question

    static Verdict clear() { return Verdict{Kind::Clear, ""}; }
    static Verdict ask(std::string q) { return Verdict{Kind::Question, std::move(q)}; }

    bool is_question() const { return kind == Kind::Question; }
    bool operator==(const Verdict&) const = default;
};

// What a leader (or baseline agent) puts on the table each round.
struct Proposal {
    std::string reasoning;
    Verdict verdict;

    bool operator==(const Proposal&) const = default;
};

struct FollowerFeedback {
    enum class Stance { Agree, Disagree };

    Stance stance = Stance::Agree;
    std::string reasoning;
    std::optional<std::string> alternative_question;

    bool agrees() const { return stance == Stance::Agree; }
    bool operator==(const FollowerFeedback&) const = default;
};

// A fully rendered prompt plus the structured inputs it embeds. Carrying
// leader_proposal / prior_feedback structurally lets backends and tests see
// exactly what the text embeds without re-parsing it.
struct PromptBundle {
    int entry_id = 0;
    Role role = Role::Baseline;
    int round_index = 1;
    std::string system_text;
    std::string user_text;
    std::optional<Proposal> leader_proposal;     // set for follower prompts
    std::vector<FollowerFeedback> prior_feedback; // set for leader prompts, round >= 2
};

inline json to_json(const Verdict& v) {
    json j = json::object();
    j["kind"] = v.is_question() ? "question" : "clear";
    if (v.is_question()) j["question"] = v.question;
    return j;
}

inline Verdict verdict_from_json(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("kind"))
        throw SchemaError(path, "expected verdict object with 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "clear") return Verdict::clear();
    if (kind == "question") {
        if (!j.contains("question") || !j.at("question").is_string())
            throw SchemaError(path + ".question", "question verdict requires text");
        return Verdict::ask(j.at("question").get<std::string>());
    }
    throw SchemaError(path + ".kind", "unknown verdict kind '" + kind + "'");
}

inline json to_json(const Proposal& p) {
    json j = json::object();
    j["reasoning"] = p.reasoning;
    j["verdict"] = to_json(p.verdict);
    return j;
}

inline Proposal proposal_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected proposal object");
    Proposal p;
    if (j.contains("reasoning")) p.reasoning = j.at("reasoning").get<std::string>();
    if (!j.contains("verdict")) throw SchemaError(path + ".verdict", "missing field");
    p.verdict = verdict_from_json(j.at("verdict"), path + ".verdict");
    return p;
}

inline json to_json(const FollowerFeedback& f) {
    json j = json::object();
    j["stance"] = f.agrees() ? "agree" : "disagree";
    j["reasoning"] = f.reasoning;
    j["alternative_question"] = f.alternative_question ? json(*f.alternative_question) : json(nullptr);
    return j;
}

inline FollowerFeedback feedback_from_json(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("stance"))
        throw SchemaError(path, "expected feedback object with 'stance'");
    FollowerFeedback f;
    const std::string stance = j.at("stance").get<std::string>();
    if (stance == "agree") {
        f.stance = FollowerFeedback::Stance::Agree;
    } else if (stance == "disagree") {
        f.stance = FollowerFeedback::Stance::Disagree;
    } else {
        throw SchemaError(path + ".stance", "unknown stance '" + stance + "'");
    }
    if (j.contains("reasoning")) f.reasoning = j.at("reasoning").get<std::string>();
    if (j.contains("alternative_question") && !j.at("alternative_question").is_null())
        f.alternative_question = j.at("alternative_question").get<std::string>();
    return f;
}

} // namespace ambidebate
