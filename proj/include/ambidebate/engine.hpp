#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ambidebate/backends.hpp"
#include "ambidebate/dataset.hpp"
#include "ambidebate/errors.hpp"
#include "ambidebate/parsing.hpp"
#include "ambidebate/prompts.hpp"
#include "ambidebate/types.hpp"

namespace ambidebate {

// The protocol pairs one leader with the two remaining roster models, in
// roster order. Followers judge each proposal blind to each other.
inline constexpr int kFollowerCount = 2;

struct DebateConfig {
    std::vector<AgentConfig> roster;
    int max_rounds = 5;
    // Extra generations allowed after a response fails to parse.
    int parse_retry_budget = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (roster.size() < static_cast<std::size_t>(kFollowerCount) + 1)
            throw PreconditionError("roster needs at least " +
                                    std::to_string(kFollowerCount + 1) + " models");
        if (max_rounds < 1) throw PreconditionError("max_rounds must be >= 1");
        if (parse_retry_budget < 0) throw PreconditionError("parse_retry_budget must be >= 0");
        for (const auto& agent : roster) agent.validate();
    }
};

struct StoredPrompt {
    std::string system_text;
    std::string user_text;

    bool operator==(const StoredPrompt&) const = default;
};

struct FollowerTurn {
    std::string model;
    StoredPrompt prompt;
    std::string raw_text;
    FollowerFeedback feedback;
    double latency_seconds = 0.0;
};

struct RoundRecord {
    int index = 1;
    StoredPrompt leader_prompt;
    std::string leader_raw;
    Proposal proposal;
    double leader_latency_seconds = 0.0;
    std::vector<FollowerTurn> followers;
    bool consensus = false;
};

enum class OutcomeKind { Consensus, NonConsensus, Error };

inline std::string to_string(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::Consensus: return "consensus";
        case OutcomeKind::NonConsensus: return "non_consensus";
        case OutcomeKind::Error: return "error";
    }
    return "unknown";
}

inline OutcomeKind outcome_kind_from_string(const std::string& s, const std::string& path) {
    if (s == "consensus") return OutcomeKind::Consensus;
    if (s == "non_consensus") return OutcomeKind::NonConsensus;
    if (s == "error") return OutcomeKind::Error;
    throw SchemaError(path, "unknown outcome kind '" + s + "'");
}

struct Outcome {
    OutcomeKind kind = OutcomeKind::Error;
    std::optional<Proposal> final_proposal;
    int at_round = 0;
    // Where an unrecoverable failure happened, e.g. "leader@round2".
    std::string error_stage;
    std::string error_cause;
};

struct DebateTranscript {
    int entry_id = 0;
    std::string leader_model;
    std::vector<std::string> follower_models;
    std::vector<RoundRecord> rounds;
    Outcome outcome;
    double wall_time_seconds = 0.0;
    std::uint64_t seed = 0;
};

struct BaselineRecord {
    int entry_id = 0;
    std::string model;
    StoredPrompt prompt;
    std::string raw_text;
    std::optional<Proposal> proposal;
    std::string error_cause; // empty on success
    double latency_seconds = 0.0;
    double wall_time_seconds = 0.0;

    bool ok() const { return proposal.has_value(); }
};

struct EngineContext {
    PromptTemplates templates = PromptTemplates::defaults();
    BackendSet backends;
    ClockFn clock = steady_clock_fn();

    Backend& backend_for(const std::string& model) const {
        auto it = backends.find(model);
        if (it == backends.end() || !it->second)
            throw PreconditionError("no backend configured for model '" + model + "'");
        return *it->second;
    }
};

namespace detail {

template <typename T>
struct ParsedGeneration {
    T value;
    std::string raw_text;
    double latency_seconds = 0.0;
};

// One generation plus up to parse_retry_budget regenerations when the text
// fails to parse. Transport and HTTP failures are final here; the backend
// already retried the transport layer.
template <typename T, typename ParseFn>
ParsedGeneration<T> generate_parsed(Backend& backend, const AgentConfig& agent,
                                    const PromptBundle& prompt, int parse_retry_budget,
                                    ParseFn&& parse) {
    ParsedGeneration<T> out;
    for (int attempt = 0;; ++attempt) {
        GenerationRecord record = backend.generate(agent, prompt);
        out.latency_seconds += record.latency_seconds;
        out.raw_text = std::move(record.raw_text);
        try {
            out.value = parse(out.raw_text);
            return out;
        } catch (const ParseError&) {
            if (attempt >= parse_retry_budget) throw;
        }
    }
}

inline std::string describe_error(const Error& e) {
    return std::string(e.code()) + ": " + e.what();
}

} // namespace detail

inline BaselineRecord run_baseline(const EngineContext& ctx, const InstructionEntry& entry,
                                   const AgentConfig& agent, int parse_retry_budget = 1) {
    BaselineRecord record;
    record.entry_id = entry.id;
    record.model = agent.model_name;

    Backend& backend = ctx.backend_for(agent.model_name);
    const PromptBundle bundle = build_baseline_prompt(ctx.templates, entry, agent);
    record.prompt = {bundle.system_text, bundle.user_text};

    const double t0 = ctx.clock();
    try {
        auto gen = detail::generate_parsed<Proposal>(
            backend, agent, bundle, parse_retry_budget,
            [](const std::string& text) { return parse_proposal(text); });
        record.raw_text = gen.raw_text;
        record.proposal = std::move(gen.value);
        record.latency_seconds = gen.latency_seconds;
    } catch (const Error& e) {
        record.error_cause = detail::describe_error(e);
    }
    record.wall_time_seconds = ctx.clock() - t0;
    return record;
}

// One debate on one entry with a fixed leader. Rounds run until both
// followers agree, the round cap is hit, or a turn fails unrecoverably.
// Only completed rounds are recorded; the error stage pinpoints the failing
// turn instead.
inline DebateTranscript run_debate(const EngineContext& ctx, const InstructionEntry& entry,
                                   const DebateConfig& cfg, std::size_t leader_index) {
    cfg.validate();
    if (leader_index >= cfg.roster.size())
        throw PreconditionError("leader index out of range");

    DebateTranscript t;
    t.entry_id = entry.id;
    t.seed = cfg.seed;
    const AgentConfig& leader = cfg.roster[leader_index];
    t.leader_model = leader.model_name;
    std::vector<AgentConfig> followers;
    for (std::size_t i = 0; i < cfg.roster.size(); ++i) {
        if (i == leader_index) continue;
        followers.push_back(cfg.roster[i]);
        t.follower_models.push_back(cfg.roster[i].model_name);
        if (followers.size() == static_cast<std::size_t>(kFollowerCount)) break;
    }

    // a missing backend is a wiring mistake, caught before any turn runs
    Backend& leader_backend = ctx.backend_for(leader.model_name);
    std::vector<Backend*> follower_backends;
    for (const AgentConfig& follower : followers)
        follower_backends.push_back(&ctx.backend_for(follower.model_name));

    const double t0 = ctx.clock();
    auto finish = [&](Outcome outcome) {
        t.outcome = std::move(outcome);
        t.wall_time_seconds = ctx.clock() - t0;
        return t;
    };

    std::optional<std::vector<FollowerFeedback>> prior_feedback;
    for (int round = 1; round <= cfg.max_rounds; ++round) {
        RoundRecord rec;
        rec.index = round;

        const PromptBundle leader_bundle =
            build_leader_prompt(ctx.templates, entry, leader, round, prior_feedback);
        rec.leader_prompt = {leader_bundle.system_text, leader_bundle.user_text};
        try {
            auto gen = detail::generate_parsed<Proposal>(
                leader_backend, leader, leader_bundle, cfg.parse_retry_budget,
                [](const std::string& text) { return parse_proposal(text); });
            rec.leader_raw = gen.raw_text;
            rec.proposal = std::move(gen.value);
            rec.leader_latency_seconds = gen.latency_seconds;
        } catch (const Error& e) {
            Outcome out;
            out.kind = OutcomeKind::Error;
            out.at_round = round;
            out.error_stage = "leader@round" + std::to_string(round);
            out.error_cause = detail::describe_error(e);
            return finish(std::move(out));
        }

        std::vector<FollowerFeedback> feedback;
        for (std::size_t k = 0; k < followers.size(); ++k) {
            const AgentConfig& follower = followers[k];
            const PromptBundle follower_bundle =
                build_follower_prompt(ctx.templates, entry, follower, rec.proposal, round);
            FollowerTurn turn;
            turn.model = follower.model_name;
            turn.prompt = {follower_bundle.system_text, follower_bundle.user_text};
            try {
                auto gen = detail::generate_parsed<FollowerFeedback>(
                    *follower_backends[k], follower, follower_bundle, cfg.parse_retry_budget,
                    [](const std::string& text) { return parse_feedback(text); });
                turn.raw_text = gen.raw_text;
                turn.feedback = std::move(gen.value);
                turn.latency_seconds = gen.latency_seconds;
            } catch (const Error& e) {
                Outcome out;
                out.kind = OutcomeKind::Error;
                out.at_round = round;
                out.error_stage =
                    "follower" + std::to_string(k + 1) + "@round" + std::to_string(round);
                out.error_cause = detail::describe_error(e);
                return finish(std::move(out));
            }
            feedback.push_back(turn.feedback);
            rec.followers.push_back(std::move(turn));
        }

        const bool consensus =
            std::all_of(feedback.begin(), feedback.end(),
                        [](const FollowerFeedback& f) { return f.agrees(); });
        rec.consensus = consensus;
        const Proposal final_proposal = rec.proposal;
        t.rounds.push_back(std::move(rec));

        if (consensus) {
            Outcome out;
            out.kind = OutcomeKind::Consensus;
            out.final_proposal = final_proposal;
            out.at_round = round;
            return finish(std::move(out));
        }
        prior_feedback = std::move(feedback);
    }

    Outcome out;
    out.kind = OutcomeKind::NonConsensus;
    out.at_round = cfg.max_rounds;
    if (!t.rounds.empty()) out.final_proposal = t.rounds.back().proposal;
    return finish(std::move(out));
}

// Every roster model takes one turn as leader on the same entry.
inline std::vector<DebateTranscript> run_rotation(const EngineContext& ctx,
                                                  const InstructionEntry& entry,
                                                  const DebateConfig& cfg) {
    std::vector<DebateTranscript> out;
    out.reserve(cfg.roster.size());
    for (std::size_t i = 0; i < cfg.roster.size(); ++i)
        out.push_back(run_debate(ctx, entry, cfg, i));
    return out;
}

// ---- Experiment driver ---------------------------------------------------

class ExperimentSink {
public:
    virtual ~ExperimentSink() = default;
    virtual void on_baseline(const BaselineRecord&) {}
    virtual void on_transcript(const DebateTranscript&) {}
};

class CollectingSink : public ExperimentSink {
public:
    void on_baseline(const BaselineRecord& r) override { baselines.push_back(r); }
    void on_transcript(const DebateTranscript& t) override { transcripts.push_back(t); }

    std::vector<BaselineRecord> baselines;
    std::vector<DebateTranscript> transcripts;
};

struct RunSummary {
    int entries = 0;
    int baselines = 0;
    int baseline_errors = 0;
    int debates = 0;
    int consensus = 0;
    int non_consensus = 0;
    int debate_errors = 0;
};

struct ExperimentOptions {
    bool run_baselines = true;
    bool run_debates = true;
    std::function<void(int done, int total)> progress;
};

// Per entry: baselines for each roster model, then a full leader rotation,
// both in roster order.
inline RunSummary run_experiment(const EngineContext& ctx,
                                 const std::vector<InstructionEntry>& dataset,
                                 const DebateConfig& cfg, ExperimentSink& sink,
                                 const ExperimentOptions& options = {}) {
    cfg.validate();
    RunSummary summary;
    const int total = static_cast<int>(dataset.size());
    for (const auto& entry : dataset) {
        if (options.run_baselines) {
            for (const auto& agent : cfg.roster) {
                BaselineRecord record =
                    run_baseline(ctx, entry, agent, cfg.parse_retry_budget);
                ++summary.baselines;
                if (!record.ok()) ++summary.baseline_errors;
                sink.on_baseline(record);
            }
        }
        if (options.run_debates) {
            for (std::size_t i = 0; i < cfg.roster.size(); ++i) {
                DebateTranscript transcript = run_debate(ctx, entry, cfg, i);
                ++summary.debates;
                switch (transcript.outcome.kind) {
                    case OutcomeKind::Consensus: ++summary.consensus; break;
                    case OutcomeKind::NonConsensus: ++summary.non_consensus; break;
                    case OutcomeKind::Error: ++summary.debate_errors; break;
                }
                sink.on_transcript(transcript);
            }
        }
        ++summary.entries;
        if (options.progress) options.progress(summary.entries, total);
    }
    return summary;
}

// ---- JSON (de)serialization ----------------------------------------------

inline json to_json(const StoredPrompt& p) {
    return json{{"system", p.system_text}, {"user", p.user_text}};
}

inline StoredPrompt stored_prompt_from_json(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("system") || !j.contains("user"))
        throw SchemaError(path, "expected {system, user}");
    return StoredPrompt{j.at("system").get<std::string>(), j.at("user").get<std::string>()};
}

inline json to_json(const FollowerTurn& t) {
    json j = json::object();
    j["model"] = t.model;
    j["prompt"] = to_json(t.prompt);
    j["raw_text"] = t.raw_text;
    j["feedback"] = to_json(t.feedback);
    j["latency_seconds"] = t.latency_seconds;
    return j;
}

inline FollowerTurn follower_turn_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected follower turn object");
    for (const char* key : {"model", "prompt", "raw_text", "feedback", "latency_seconds"})
        if (!j.contains(key)) throw SchemaError(path + "." + key, "missing field");
    FollowerTurn t;
    t.model = j.at("model").get<std::string>();
    t.prompt = stored_prompt_from_json(j.at("prompt"), path + ".prompt");
    t.raw_text = j.at("raw_text").get<std::string>();
    t.feedback = feedback_from_json(j.at("feedback"), path + ".feedback");
    t.latency_seconds = j.at("latency_seconds").get<double>();
    return t;
}

inline json to_json(const RoundRecord& r) {
    json j = json::object();
    j["index"] = r.index;
    j["leader_prompt"] = to_json(r.leader_prompt);
    j["leader_raw"] = r.leader_raw;
    j["proposal"] = to_json(r.proposal);
    j["leader_latency_seconds"] = r.leader_latency_seconds;
    json followers = json::array();
    for (const auto& f : r.followers) followers.push_back(to_json(f));
    j["followers"] = std::move(followers);
    j["consensus"] = r.consensus;
    return j;
}

inline RoundRecord round_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected round object");
    for (const char* key : {"index", "leader_prompt", "leader_raw", "proposal",
                            "leader_latency_seconds", "followers", "consensus"})
        if (!j.contains(key)) throw SchemaError(path + "." + key, "missing field");
    RoundRecord r;
    r.index = j.at("index").get<int>();
    r.leader_prompt = stored_prompt_from_json(j.at("leader_prompt"), path + ".leader_prompt");
    r.leader_raw = j.at("leader_raw").get<std::string>();
    r.proposal = proposal_from_json(j.at("proposal"), path + ".proposal");
    r.leader_latency_seconds = j.at("leader_latency_seconds").get<double>();
    if (!j.at("followers").is_array()) throw SchemaError(path + ".followers", "expected array");
    for (std::size_t i = 0; i < j.at("followers").size(); ++i)
        r.followers.push_back(follower_turn_from_json(
            j.at("followers")[i], path + ".followers[" + std::to_string(i) + "]"));
    r.consensus = j.at("consensus").get<bool>();
    return r;
}

inline json to_json(const Outcome& o) {
    json j = json::object();
    j["kind"] = to_string(o.kind);
    j["final_proposal"] = o.final_proposal ? to_json(*o.final_proposal) : json(nullptr);
    j["at_round"] = o.at_round;
    j["error_stage"] = o.error_stage;
    j["error_cause"] = o.error_cause;
    return j;
}

inline Outcome outcome_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected outcome object");
    for (const char* key : {"kind", "final_proposal", "at_round", "error_stage", "error_cause"})
        if (!j.contains(key)) throw SchemaError(path + "." + key, "missing field");
    Outcome o;
    o.kind = outcome_kind_from_string(j.at("kind").get<std::string>(), path + ".kind");
    if (!j.at("final_proposal").is_null())
        o.final_proposal = proposal_from_json(j.at("final_proposal"), path + ".final_proposal");
    o.at_round = j.at("at_round").get<int>();
    o.error_stage = j.at("error_stage").get<std::string>();
    o.error_cause = j.at("error_cause").get<std::string>();
    return o;
}

inline json to_json(const DebateTranscript& t) {
    json j = json::object();
    j["entry_id"] = t.entry_id;
    j["leader_model"] = t.leader_model;
    j["follower_models"] = t.follower_models;
    json rounds = json::array();
    for (const auto& r : t.rounds) rounds.push_back(to_json(r));
    j["rounds"] = std::move(rounds);
    j["outcome"] = to_json(t.outcome);
    j["wall_time_seconds"] = t.wall_time_seconds;
    j["seed"] = t.seed;
    return j;
}

inline DebateTranscript transcript_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected transcript object");
    for (const char* key : {"entry_id", "leader_model", "follower_models", "rounds", "outcome",
                            "wall_time_seconds", "seed"})
        if (!j.contains(key)) throw SchemaError(path + "." + key, "missing field");
    DebateTranscript t;
    t.entry_id = j.at("entry_id").get<int>();
    t.leader_model = j.at("leader_model").get<std::string>();
    t.follower_models = j.at("follower_models").get<std::vector<std::string>>();
    if (!j.at("rounds").is_array()) throw SchemaError(path + ".rounds", "expected array");
    for (std::size_t i = 0; i < j.at("rounds").size(); ++i)
        t.rounds.push_back(
            round_from_json(j.at("rounds")[i], path + ".rounds[" + std::to_string(i) + "]"));
    t.outcome = outcome_from_json(j.at("outcome"), path + ".outcome");
    t.wall_time_seconds = j.at("wall_time_seconds").get<double>();
    t.seed = j.at("seed").get<std::uint64_t>();
    return t;
}

inline json to_json(const BaselineRecord& r) {
    json j = json::object();
    j["entry_id"] = r.entry_id;
    j["model"] = r.model;
    j["prompt"] = to_json(r.prompt);
    j["raw_text"] = r.raw_text;
    j["proposal"] = r.proposal ? to_json(*r.proposal) : json(nullptr);
    j["error_cause"] = r.error_cause;
    j["latency_seconds"] = r.latency_seconds;
    j["wall_time_seconds"] = r.wall_time_seconds;
    return j;
}

inline BaselineRecord baseline_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected baseline object");
    for (const char* key : {"entry_id", "model", "prompt", "raw_text", "proposal", "error_cause",
                            "latency_seconds", "wall_time_seconds"})
        if (!j.contains(key)) throw SchemaError(path + "." + key, "missing field");
    BaselineRecord r;
    r.entry_id = j.at("entry_id").get<int>();
    r.model = j.at("model").get<std::string>();
    r.prompt = stored_prompt_from_json(j.at("prompt"), path + ".prompt");
    r.raw_text = j.at("raw_text").get<std::string>();
    if (!j.at("proposal").is_null())
        r.proposal = proposal_from_json(j.at("proposal"), path + ".proposal");
    r.error_cause = j.at("error_cause").get<std::string>();
    r.latency_seconds = j.at("latency_seconds").get<double>();
    r.wall_time_seconds = j.at("wall_time_seconds").get<double>();
    return r;
}

// ---- JSONL files -----------------------------------------------------------

// One JSON object per line, flushed per record so a crashed run keeps what it
// produced.
class JsonlExperimentSink : public ExperimentSink {
public:
    JsonlExperimentSink(const std::filesystem::path& baselines_path,
                        const std::filesystem::path& transcripts_path)
        : baselines_(baselines_path), transcripts_(transcripts_path) {
        if (!baselines_)
            throw IoError("cannot open baselines file for writing: " + baselines_path.string());
        if (!transcripts_)
            throw IoError("cannot open transcripts file for writing: " +
                          transcripts_path.string());
    }

    void on_baseline(const BaselineRecord& r) override {
        baselines_ << to_json(r).dump() << '\n' << std::flush;
    }

    void on_transcript(const DebateTranscript& t) override {
        transcripts_ << to_json(t).dump() << '\n' << std::flush;
    }

private:
    std::ofstream baselines_;
    std::ofstream transcripts_;
};

namespace detail {

template <typename T, typename FromJson>
std::vector<T> read_jsonl(const std::filesystem::path& path, FromJson&& from_json) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::vector<T> out;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.string() + ":line " + std::to_string(line_number);
        json j;
        try {
            j = json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(where, e.what());
        }
        out.push_back(from_json(j, where));
    }
    return out;
}

} // namespace detail

inline std::vector<DebateTranscript> read_transcripts(const std::filesystem::path& path) {
    return detail::read_jsonl<DebateTranscript>(path, [](const json& j, const std::string& where) {
        return transcript_from_json(j, where);
    });
}

inline std::vector<BaselineRecord> read_baselines(const std::filesystem::path& path) {
    return detail::read_jsonl<BaselineRecord>(path, [](const json& j, const std::string& where) {
        return baseline_from_json(j, where);
    });
}

} // namespace ambidebate
