#pragma once

// Hand-built run artifacts with exact-rational counts, shared by the metrics
// tests and the acceptance suite. Every percentage these produce is a ratio
// of small integers, so the expected one-decimal renderings are unambiguous.

#include <string>
#include <vector>

#include <ambidebate/dataset.hpp>
#include <ambidebate/engine.hpp>

namespace fixtures {

using namespace ambidebate;

inline Proposal question_proposal(const std::string& question) {
    Proposal p;
    p.reasoning = "A referent stays open.";
    p.verdict = Verdict::ask(question);
    return p;
}

inline Proposal clear_proposal() {
    Proposal p;
    p.reasoning = "Reads as fully specified.";
    p.verdict = Verdict::clear();
    return p;
}

inline DebateTranscript transcript(int entry_id, const std::string& leader, OutcomeKind kind,
                                   int at_round, bool question_final,
                                   double wall_time_seconds) {
    DebateTranscript t;
    t.entry_id = entry_id;
    t.leader_model = leader;
    t.outcome.kind = kind;
    t.outcome.at_round = at_round;
    if (kind != OutcomeKind::Error)
        t.outcome.final_proposal =
            question_final ? question_proposal("how many blocks should I move?")
                           : clear_proposal();
    t.wall_time_seconds = wall_time_seconds;
    return t;
}

inline BaselineRecord baseline(int entry_id, const std::string& model, bool question) {
    BaselineRecord r;
    r.entry_id = entry_id;
    r.model = model;
    r.proposal = question ? question_proposal("how many blocks should I move?")
                          : clear_proposal();
    r.raw_text = render_proposal_text(*r.proposal);
    return r;
}

inline const std::string kLlama = "llama3-8b-instruct";
inline const std::string kGemma = "gemma2-9b-it";
inline const std::string kMistral = "mistral-7b-instruct";

// Counts chosen so reach, average rounds, and success-given-consensus land
// exactly on one-decimal values: llama 85 / 1.8 / 92, gemma 82 / 2.1 / 88,
// mistral 90 / 1.5 / 95, with average debate times 25.3 / 28.1 / 22.5.
inline std::vector<DebateTranscript> leader_effectiveness_transcripts() {
    std::vector<DebateTranscript> out;
    auto emit = [&](const std::string& leader, int round1, int round2, int round3,
                    int consensus_successes, int non_consensus, double wall_time) {
        int made = 0;
        auto push_consensus = [&](int count, int at_round) {
            for (int i = 0; i < count; ++i, ++made)
                out.push_back(transcript(1, leader, OutcomeKind::Consensus, at_round,
                                         made < consensus_successes, wall_time));
        };
        push_consensus(round1, 1);
        push_consensus(round2, 2);
        push_consensus(round3, 3);
        for (int i = 0; i < non_consensus; ++i)
            out.push_back(transcript(1, leader, OutcomeKind::NonConsensus, 5, false, wall_time));
    };
    // llama: 500 debates, 425 consensus, rounds sum 765, 391 successes
    emit(kLlama, 170, 170, 85, 391, 75, 25.3);
    // gemma: 2500 debates, 2050 consensus, rounds sum 4305, 1804 successes
    emit(kGemma, 0, 1845, 205, 1804, 450, 28.1);
    // mistral: 200 debates, 180 consensus, rounds sum 270, 171 successes
    emit(kMistral, 90, 90, 0, 171, 20, 22.5);
    return out;
}

struct HeadlineFixture {
    std::vector<BaselineRecord> baselines;
    std::vector<DebateTranscript> transcripts;
};

// Success counts over a 60-entry dataset that reproduce the headline
// percentages: singles 13.3 / 80.0 / 28.3, debates 40.0 / 48.3 / 76.7, and
// for the mistral leader a 21/38 round split with one undecided debate.
inline HeadlineFixture headline_fixture(const std::vector<InstructionEntry>& dataset) {
    HeadlineFixture fx;
    auto add_baselines = [&](const std::string& model, int successes) {
        for (const auto& e : dataset)
            fx.baselines.push_back(baseline(e.id, model, e.id <= successes));
    };
    add_baselines(kLlama, 8);
    add_baselines(kGemma, 48);
    add_baselines(kMistral, 17);

    for (const auto& e : dataset)
        fx.transcripts.push_back(
            transcript(e.id, kLlama, OutcomeKind::Consensus, 1, e.id <= 24, 10.0));
    for (const auto& e : dataset)
        fx.transcripts.push_back(
            transcript(e.id, kGemma, OutcomeKind::Consensus, 1, e.id <= 29, 10.0));
    for (const auto& e : dataset) {
        if (e.id == 60) {
            fx.transcripts.push_back(
                transcript(e.id, kMistral, OutcomeKind::NonConsensus, 5, false, 10.0));
        } else {
            const int at_round = e.id <= 21 ? 1 : 2;
            fx.transcripts.push_back(
                transcript(e.id, kMistral, OutcomeKind::Consensus, at_round, e.id <= 46, 10.0));
        }
    }
    return fx;
}

} // namespace fixtures
