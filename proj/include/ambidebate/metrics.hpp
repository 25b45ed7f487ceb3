#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ambidebate/dataset.hpp"
#include "ambidebate/engine.hpp"
#include "ambidebate/errors.hpp"
#include "ambidebate/types.hpp"

namespace ambidebate {

// Lenient: any clarifying question counts. Strict: the question must mention
// at least one term tied to the entry's actual ambiguity.
enum class JudgeMode { Lenient, Strict };

inline std::string to_string(JudgeMode m) {
    return m == JudgeMode::Lenient ? "lenient" : "strict";
}

inline JudgeMode judge_mode_from_string(const std::string& s, const std::string& path) {
    if (s == "lenient") return JudgeMode::Lenient;
    if (s == "strict") return JudgeMode::Strict;
    throw SchemaError(path, "unknown judge mode '" + s + "'");
}

// Generic question words that signal the right kind of clarification even
// when the question does not quote the instruction. Entry-specific terms are
// added on top of these.
struct TermTableConfig {
    std::vector<std::string> numerical_generic;
    std::vector<std::string> spatial_generic;

    static TermTableConfig defaults() {
        TermTableConfig t;
        t.numerical_generic = {"how many", "how much", "what number",
                               "exact number", "quantity", "count"};
        t.spatial_generic = {"where",    "left",    "right",   "in front", "behind",  "on top",
                             "next to",  "near",    "close to", "side",     "position", "direction"};
        return t;
    }

    bool operator==(const TermTableConfig&) const = default;
};

inline json to_json(const TermTableConfig& t) {
    json j = json::object();
    j["numerical_generic"] = t.numerical_generic;
    j["spatial_generic"] = t.spatial_generic;
    return j;
}

inline TermTableConfig term_table_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected term table object");
    TermTableConfig t;
    for (const char* key : {"numerical_generic", "spatial_generic"})
        if (!j.contains(key)) throw SchemaError(path + "." + std::string(key), "missing field");
    t.numerical_generic = j.at("numerical_generic").get<std::vector<std::string>>();
    t.spatial_generic = j.at("spatial_generic").get<std::vector<std::string>>();
    return t;
}

inline TermTableConfig read_term_table(const std::filesystem::path& source) {
    std::ifstream in(source);
    if (!in) throw IoError("cannot open term table file: " + source.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(source.string(), e.what());
    }
    return term_table_from_json(j, source.string());
}

namespace detail {

inline bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Case-insensitive containment with word boundaries on both ends of the
// needle. Multi-word needles match across single spaces only, exactly as
// written.
inline bool contains_term(const std::string& haystack_lower, const std::string& needle_lower) {
    if (needle_lower.empty()) return false;
    std::size_t pos = 0;
    while ((pos = haystack_lower.find(needle_lower, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !is_word_char(haystack_lower[pos - 1]);
        const std::size_t end = pos + needle_lower.size();
        const bool right_ok = end == haystack_lower.size() || !is_word_char(haystack_lower[end]);
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline void push_unique(std::vector<std::string>& terms, const std::string& term) {
    if (term.empty()) return;
    if (std::find(terms.begin(), terms.end(), term) == terms.end()) terms.push_back(term);
}

} // namespace detail

// The terms a strict judge accepts for an entry, in match-priority order:
// generic question words first, then the entry's own slot terms.
inline std::vector<std::string> judge_terms_for(const InstructionEntry& e,
                                                const TermTableConfig& table) {
    std::vector<std::string> terms;
    const SlotRecord& s = e.slots;
    switch (category_of(e.ambiguity_type)) {
        case AmbiguityCategory::Numerical:
            for (const auto& t : table.numerical_generic) detail::push_unique(terms, t);
            if (s.quantity_vague) detail::push_unique(terms, *s.quantity_vague);
            detail::push_unique(terms, s.quantity_precise);
            detail::push_unique(terms, s.object_color + " " + s.object_noun);
            detail::push_unique(terms, s.object_color + " " + s.object_noun + "s");
            break;
        case AmbiguityCategory::Attribute:
            detail::push_unique(terms, s.object_noun);
            detail::push_unique(terms, s.object_noun + "s");
            detail::push_unique(terms, s.object_color);
            if (s.noun_substitute) detail::push_unique(terms, *s.noun_substitute);
            if (s.color_substitute) detail::push_unique(terms, *s.color_substitute);
            detail::push_unique(terms, s.object_color + " " + s.object_noun);
            detail::push_unique(terms, s.object_color + " " + s.object_noun + "s");
            break;
        case AmbiguityCategory::Spatial:
            detail::push_unique(terms, s.preposition_precise);
            if (s.preposition_vague) detail::push_unique(terms, *s.preposition_vague);
            for (const auto& t : table.spatial_generic) detail::push_unique(terms, t);
            detail::push_unique(terms, s.landmark_color + " " + s.landmark_noun);
            detail::push_unique(terms, s.landmark_noun);
            break;
    }
    return terms;
}

struct SuccessJudgment {
    bool success = false;
    std::vector<std::string> matched_terms;
};

// Judges one clarifying question against one entry. Callers pass questions
// only; a clear verdict on an ambiguous instruction is a failure before any
// judging happens.
inline SuccessJudgment judge_question(const InstructionEntry& entry, const std::string& question,
                                      JudgeMode mode,
                                      const TermTableConfig& table = TermTableConfig::defaults()) {
    SuccessJudgment out;
    const std::string haystack = detail::lower(question);
    for (const auto& term : judge_terms_for(entry, table))
        if (detail::contains_term(haystack, detail::lower(term)))
            out.matched_terms.push_back(term);
    out.success =
        mode == JudgeMode::Lenient ? !question.empty() : !out.matched_terms.empty();
    return out;
}

// ---- Aggregation -----------------------------------------------------------

struct ReportOptions {
    JudgeMode mode = JudgeMode::Strict;
    // When false, undecided debates drop out of the success denominator
    // instead of counting against it.
    bool non_consensus_counts_as_failure = true;
    TermTableConfig term_table = TermTableConfig::defaults();
};

struct SplitCounts {
    int total = 0;
    int success = 0;

    double pct() const { return total == 0 ? 0.0 : success * 100.0 / total; }
};

struct ConfigStats {
    std::string label; // "single:<model>" or "debate:<leader>"
    std::string model;
    SplitCounts overall;
    std::map<std::string, SplitCounts> by_category;
    std::map<std::string, SplitCounts> by_type;
};

struct LeaderStats {
    std::string leader;
    int debates = 0;
    int consensus = 0;
    int non_consensus = 0;
    int errors = 0;
    long long consensus_rounds_sum = 0;
    int consensus_success = 0;
    std::map<int, int> round_histogram; // consensus round -> count
    double wall_time_sum = 0.0;

    double consensus_reach_pct() const {
        return debates == 0 ? 0.0 : consensus * 100.0 / debates;
    }
    double avg_rounds() const {
        return consensus == 0 ? 0.0
                              : static_cast<double>(consensus_rounds_sum) / consensus;
    }
    double consensus_success_pct() const {
        return consensus == 0 ? 0.0 : consensus_success * 100.0 / consensus;
    }
    double non_consensus_pct() const {
        return debates == 0 ? 0.0 : non_consensus * 100.0 / debates;
    }
    double avg_debate_time_s() const {
        return debates == 0 ? 0.0 : wall_time_sum / debates;
    }
};

struct MetricsReport {
    ReportOptions options;
    int dataset_size = 0;
    std::map<std::string, int> dataset_by_category;
    std::vector<ConfigStats> singles;
    std::vector<ConfigStats> debates;
    std::vector<LeaderStats> leaders;
};

namespace detail {

inline ConfigStats& stats_slot(std::vector<ConfigStats>& list, const std::string& label,
                               const std::string& model) {
    for (auto& s : list)
        if (s.label == label) return s;
    ConfigStats s;
    s.label = label;
    s.model = model;
    list.push_back(std::move(s));
    return list.back();
}

inline LeaderStats& leader_slot(std::vector<LeaderStats>& list, const std::string& leader) {
    for (auto& s : list)
        if (s.leader == leader) return s;
    LeaderStats s;
    s.leader = leader;
    list.push_back(std::move(s));
    return list.back();
}

inline void count_result(ConfigStats& stats, const InstructionEntry& entry, bool success) {
    ++stats.overall.total;
    auto& cat = stats.by_category[to_string(category_of(entry.ambiguity_type))];
    auto& typ = stats.by_type[to_string(entry.ambiguity_type)];
    ++cat.total;
    ++typ.total;
    if (success) {
        ++stats.overall.success;
        ++cat.success;
        ++typ.success;
    }
}

} // namespace detail

// Joins records back to their dataset entries and folds everything into one
// report. A record that references an entry id the dataset does not contain
// is a hard error; silently dropping it would skew every percentage.
inline MetricsReport compute_report(const std::vector<InstructionEntry>& dataset,
                                    const std::vector<BaselineRecord>& baselines,
                                    const std::vector<DebateTranscript>& transcripts,
                                    const ReportOptions& options = {}) {
    std::map<int, const InstructionEntry*> by_id;
    for (const auto& e : dataset) by_id[e.id] = &e;
    auto entry_of = [&](int id, const char* what) -> const InstructionEntry& {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw KeyMismatch(std::string(what) + " references entry id " + std::to_string(id) +
                              " which is not in the dataset");
        return *it->second;
    };

    MetricsReport report;
    report.options = options;
    report.dataset_size = static_cast<int>(dataset.size());
    for (const auto& e : dataset)
        ++report.dataset_by_category[to_string(category_of(e.ambiguity_type))];

    for (const auto& b : baselines) {
        const InstructionEntry& entry = entry_of(b.entry_id, "baseline record");
        bool success = false;
        if (b.ok() && b.proposal->verdict.is_question())
            success = judge_question(entry, b.proposal->verdict.question, options.mode,
                                     options.term_table)
                          .success;
        auto& stats = detail::stats_slot(report.singles, "single:" + b.model, b.model);
        detail::count_result(stats, entry, success);
    }

    for (const auto& t : transcripts) {
        const InstructionEntry& entry = entry_of(t.entry_id, "transcript");
        auto& leader = detail::leader_slot(report.leaders, t.leader_model);
        ++leader.debates;
        leader.wall_time_sum += t.wall_time_seconds;

        bool success = false;
        bool in_denominator = true;
        switch (t.outcome.kind) {
            case OutcomeKind::Consensus: {
                ++leader.consensus;
                leader.consensus_rounds_sum += t.outcome.at_round;
                ++leader.round_histogram[t.outcome.at_round];
                if (t.outcome.final_proposal &&
                    t.outcome.final_proposal->verdict.is_question()) {
                    success = judge_question(entry, t.outcome.final_proposal->verdict.question,
                                             options.mode, options.term_table)
                                  .success;
                }
                if (success) ++leader.consensus_success;
                break;
            }
            case OutcomeKind::NonConsensus:
                ++leader.non_consensus;
                in_denominator = options.non_consensus_counts_as_failure;
                break;
            case OutcomeKind::Error:
                ++leader.errors;
                break;
        }

        if (in_denominator) {
            auto& stats =
                detail::stats_slot(report.debates, "debate:" + t.leader_model, t.leader_model);
            detail::count_result(stats, entry, success);
        }
    }
    return report;
}

// ---- Emission ----------------------------------------------------------------

// Fixed-point with one decimal, with a whole-number result printed without
// the trailing ".0". Matches how the summary tables are usually read:
// 92 stays 92, 1.8 stays 1.8.
inline std::string format_metric(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", value);
    std::string s(buf);
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.resize(s.size() - 2);
    if (s == "-0") s = "0";
    return s;
}

namespace detail {

inline std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open report file for writing: " + path.string());
    return out;
}

inline void write_success_csv(const std::filesystem::path& path, const MetricsReport& report,
                              const std::optional<std::string>& category) {
    auto out = open_csv(path);
    out << "configuration,success_pct\n";
    auto emit = [&](const std::vector<ConfigStats>& list) {
        for (const auto& s : list) {
            SplitCounts counts = s.overall;
            if (category) {
                auto it = s.by_category.find(*category);
                counts = it == s.by_category.end() ? SplitCounts{} : it->second;
            }
            out << s.label << ',' << format_metric(counts.pct()) << '\n';
        }
    };
    emit(report.singles);
    emit(report.debates);
    if (!out) throw IoError("failed while writing " + path.string());
}

} // namespace detail

inline json to_json(const MetricsReport& r);

// Writes the eight report artifacts into out_dir and returns their paths in
// a fixed order.
inline std::vector<std::filesystem::path> emit_reports(const MetricsReport& report,
                                                       const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;

    const auto fig2 = out_dir / "fig2_overall.csv";
    detail::write_success_csv(fig2, report, std::nullopt);
    written.push_back(fig2);
    const auto fig3 = out_dir / "fig3_attribute.csv";
    detail::write_success_csv(fig3, report, std::string("attribute"));
    written.push_back(fig3);
    const auto fig4 = out_dir / "fig4_numerical.csv";
    detail::write_success_csv(fig4, report, std::string("numerical"));
    written.push_back(fig4);
    const auto fig5 = out_dir / "fig5_spatial.csv";
    detail::write_success_csv(fig5, report, std::string("spatial"));
    written.push_back(fig5);

    {
        const auto path = out_dir / "fig6_rounds.csv";
        auto out = detail::open_csv(path);
        out << "leader,round,consensus_count\n";
        for (const auto& l : report.leaders)
            for (const auto& [round, count] : l.round_histogram)
                out << l.leader << ',' << round << ',' << count << '\n';
        if (!out) throw IoError("failed while writing " + path.string());
        written.push_back(path);
    }
    {
        const auto path = out_dir / "fig7_nonconsensus.csv";
        auto out = detail::open_csv(path);
        out << "leader,non_consensus_pct\n";
        for (const auto& l : report.leaders)
            out << l.leader << ',' << format_metric(l.non_consensus_pct()) << '\n';
        if (!out) throw IoError("failed while writing " + path.string());
        written.push_back(path);
    }
    {
        const auto path = out_dir / "table1_leader_effectiveness.csv";
        auto out = detail::open_csv(path);
        out << "leader,consensus_reach_pct,avg_rounds,success_pct\n";
        for (const auto& l : report.leaders)
            out << l.leader << ',' << format_metric(l.consensus_reach_pct()) << ','
                << format_metric(l.avg_rounds()) << ','
                << format_metric(l.consensus_success_pct()) << '\n';
        if (!out) throw IoError("failed while writing " + path.string());
        written.push_back(path);
    }
    {
        const auto path = out_dir / "table2_timing.csv";
        auto out = detail::open_csv(path);
        out << "leader,avg_debate_time_s\n";
        for (const auto& l : report.leaders)
            out << l.leader << ',' << format_metric(l.avg_debate_time_s()) << '\n';
        if (!out) throw IoError("failed while writing " + path.string());
        written.push_back(path);
    }
    {
        const auto path = out_dir / "report.json";
        auto out = detail::open_csv(path);
        out << to_json(report).dump(2) << '\n';
        if (!out) throw IoError("failed while writing " + path.string());
        written.push_back(path);
    }
    return written;
}

inline json to_json(const SplitCounts& c) {
    json j = json::object();
    j["total"] = c.total;
    j["success"] = c.success;
    j["success_pct"] = c.pct();
    return j;
}

inline json to_json(const ConfigStats& s) {
    json j = json::object();
    j["label"] = s.label;
    j["model"] = s.model;
    j["overall"] = to_json(s.overall);
    json by_category = json::object();
    for (const auto& [k, v] : s.by_category) by_category[k] = to_json(v);
    j["by_category"] = std::move(by_category);
    json by_type = json::object();
    for (const auto& [k, v] : s.by_type) by_type[k] = to_json(v);
    j["by_type"] = std::move(by_type);
    return j;
}

inline json to_json(const LeaderStats& l) {
    json j = json::object();
    j["leader"] = l.leader;
    j["debates"] = l.debates;
    j["consensus"] = l.consensus;
    j["non_consensus"] = l.non_consensus;
    j["errors"] = l.errors;
    j["consensus_reach_pct"] = l.consensus_reach_pct();
    j["avg_rounds"] = l.avg_rounds();
    j["consensus_success"] = l.consensus_success;
    j["consensus_success_pct"] = l.consensus_success_pct();
    j["non_consensus_pct"] = l.non_consensus_pct();
    j["avg_debate_time_s"] = l.avg_debate_time_s();
    json histogram = json::object();
    for (const auto& [round, count] : l.round_histogram) {
        json cell = json::object();
        cell["count"] = count;
        cell["share_pct"] = l.consensus == 0 ? 0.0 : count * 100.0 / l.consensus;
        histogram[std::to_string(round)] = std::move(cell);
    }
    j["round_histogram"] = std::move(histogram);
    return j;
}

inline json to_json(const MetricsReport& r) {
    json j = json::object();
    j["schema_version"] = 1;
    j["judge_mode"] = to_string(r.options.mode);
    j["non_consensus_counts_as_failure"] = r.options.non_consensus_counts_as_failure;
    json dataset = json::object();
    dataset["size"] = r.dataset_size;
    dataset["by_category"] = r.dataset_by_category;
    j["dataset"] = std::move(dataset);
    json singles = json::array();
    for (const auto& s : r.singles) singles.push_back(to_json(s));
    j["singles"] = std::move(singles);
    json debates = json::array();
    for (const auto& s : r.debates) debates.push_back(to_json(s));
    j["debates"] = std::move(debates);
    json leaders = json::array();
    for (const auto& l : r.leaders) leaders.push_back(to_json(l));
    j["leaders"] = std::move(leaders);
    return j;
}

} // namespace ambidebate
