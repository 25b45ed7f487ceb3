#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ambidebate/errors.hpp"
#include "ambidebate/types.hpp"

namespace ambidebate {

namespace detail {

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return "";
    const auto last = s.find_last_not_of(ws);
    return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        if (nl == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

struct MarkerLine {
    std::string key;   // lowercase
    std::string value; // rest of the line, trimmed
};

// A marker is a known key at the start of a line (leading whitespace and an
// optional bullet allowed), immediately followed by a colon. Anything else is
// chatter or a continuation of the previous marker.
inline std::optional<MarkerLine> match_marker(const std::string& line) {
    static const std::vector<std::string> keys = {"reasoning", "verdict", "stance",
                                                  "alt_question"};
    std::size_t i = line.find_first_not_of(" \t");
    if (i == std::string::npos) return std::nullopt;
    if (line[i] == '-' || line[i] == '*') {
        i = line.find_first_not_of(" \t", i + 1);
        if (i == std::string::npos) return std::nullopt;
    }
    const std::string lower = to_lower(line.substr(i));
    for (const auto& key : keys) {
        if (lower.rfind(key, 0) == 0 && lower.size() > key.size() && lower[key.size()] == ':')
            return MarkerLine{key, trim(line.substr(i + key.size() + 1))};
    }
    return std::nullopt;
}

// Marker values collected in order of appearance, with non-marker lines
// folded into the preceding marker's value. Text before any marker is
// ignored.
inline std::vector<MarkerLine> collect_markers(const std::string& text) {
    std::vector<MarkerLine> markers;
    for (const auto& raw : split_lines(text)) {
        if (auto m = match_marker(raw)) {
            markers.push_back(std::move(*m));
        } else if (!markers.empty()) {
            const std::string continuation = trim(raw);
            if (!continuation.empty()) {
                if (!markers.back().value.empty()) markers.back().value += ' ';
                markers.back().value += continuation;
            }
        }
    }
    return markers;
}

// First-word match with a boundary check, so trailing chatter after the
// keyword does not invalidate an otherwise well-formed value, while e.g.
// "clearly" stays rejected.
inline bool first_word_is(const std::string& value, std::string_view word) {
    const std::string lower = to_lower(value);
    if (lower.rfind(word, 0) != 0) return false;
    if (lower.size() == word.size()) return true;
    const unsigned char next = static_cast<unsigned char>(lower[word.size()]);
    return std::isalnum(next) == 0 && next != '_';
}

inline bool is_clear_value(const std::string& value) { return first_word_is(value, "clear"); }

// "QUESTION: <q>" or "QUESTION <q>"; returns the question text when matched.
inline std::optional<std::string> question_value(const std::string& value) {
    const std::string lower = to_lower(value);
    if (lower.rfind("question", 0) != 0) return std::nullopt;
    std::size_t i = 8;
    if (i < value.size() && (value[i] == ':' || value[i] == ' ' || value[i] == '\t')) {
        if (value[i] == ':') ++i;
        return trim(value.substr(i));
    }
    if (i == value.size()) return std::string{};
    return std::nullopt;
}

} // namespace detail

// Leader and baseline responses. Tolerant of chatter around the markers,
// strict about the markers themselves: exactly one VERDICT, recognizable
// value, non-empty question. A missing REASONING parses as empty reasoning.
inline Proposal parse_proposal(const std::string& text) {
    const auto markers = detail::collect_markers(text);

    std::optional<std::string> reasoning;
    std::optional<std::string> verdict_value;
    for (const auto& m : markers) {
        if (m.key == "reasoning") {
            if (!reasoning) reasoning = m.value;
        } else if (m.key == "verdict") {
            if (verdict_value) throw ParseError("response contains more than one VERDICT marker");
            verdict_value = m.value;
        } else {
            throw ParseError("unexpected " + detail::to_lower(m.key) + " marker in a proposal");
        }
    }
    if (!verdict_value) throw ParseError("response contains no VERDICT marker");

    Proposal p;
    p.reasoning = reasoning.value_or("");
    if (detail::is_clear_value(*verdict_value)) {
        p.verdict = Verdict::clear();
        return p;
    }
    if (auto q = detail::question_value(*verdict_value)) {
        if (q->empty()) throw ParseError("VERDICT: QUESTION carries no question text");
        p.verdict = Verdict::ask(*q);
        return p;
    }
    throw ParseError("unrecognized VERDICT value: '" + *verdict_value + "'");
}

// Follower responses: exactly one STANCE (AGREE or DISAGREE), optional
// REASONING, optional ALT_QUESTION. Agreeing while proposing an alternative
// question is contradictory and rejected.
inline FollowerFeedback parse_feedback(const std::string& text) {
    const auto markers = detail::collect_markers(text);

    std::optional<std::string> stance_value;
    std::optional<std::string> reasoning;
    std::optional<std::string> alt;
    for (const auto& m : markers) {
        if (m.key == "stance") {
            if (stance_value) throw ParseError("response contains more than one STANCE marker");
            stance_value = m.value;
        } else if (m.key == "reasoning") {
            if (!reasoning) reasoning = m.value;
        } else if (m.key == "alt_question") {
            if (alt) throw ParseError("response contains more than one ALT_QUESTION marker");
            alt = m.value;
        } else {
            throw ParseError("unexpected verdict marker in follower feedback");
        }
    }
    if (!stance_value) throw ParseError("response contains no STANCE marker");

    FollowerFeedback f;
    f.reasoning = reasoning.value_or("");
    if (detail::first_word_is(*stance_value, "agree")) {
        f.stance = FollowerFeedback::Stance::Agree;
    } else if (detail::first_word_is(*stance_value, "disagree")) {
        f.stance = FollowerFeedback::Stance::Disagree;
    } else {
        throw ParseError("unrecognized STANCE value: '" + *stance_value + "'");
    }
    if (alt && !alt->empty()) {
        if (f.agrees())
            throw ParseError("AGREE stance combined with an ALT_QUESTION is contradictory");
        f.alternative_question = *alt;
    }
    return f;
}

// Inverse direction: structured values rendered back into marker text. The
// scripted and synthetic backends speak through these so their output always
// round-trips through the parsers above.
inline std::string render_proposal_text(const Proposal& p) {
    std::string out;
    if (!p.reasoning.empty()) out += "REASONING: " + p.reasoning + "\n";
    out += "VERDICT: ";
    out += p.verdict.is_question() ? "QUESTION: " + p.verdict.question : std::string("CLEAR");
    out += '\n';
    return out;
}

inline std::string render_feedback_text(const FollowerFeedback& f) {
    std::string out;
    if (!f.reasoning.empty()) out += "REASONING: " + f.reasoning + "\n";
    out += "STANCE: ";
    out += f.agrees() ? "AGREE" : "DISAGREE";
    out += '\n';
    if (f.alternative_question) out += "ALT_QUESTION: " + *f.alternative_question + "\n";
    return out;
}

} // namespace ambidebate
