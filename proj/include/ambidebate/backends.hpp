#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "ambidebate/errors.hpp"
#include "ambidebate/parsing.hpp"
#include "ambidebate/rng.hpp"
#include "ambidebate/types.hpp"

namespace ambidebate {

// Injectable time source, seconds. Everything that stamps a latency or wall
// time draws from one of these, so runs can be made byte-reproducible by
// swapping in the counting clock.
using ClockFn = std::function<double()>;

inline ClockFn steady_clock_fn() {
    return [] {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now().time_since_epoch())
            .count();
    };
}

// Advances by a fixed step per call. Shared state, so copies of the returned
// function tick the same counter.
inline ClockFn counting_clock_fn(double start = 0.0, double step = 1.0) {
    auto state = std::make_shared<std::atomic<std::uint64_t>>(0);
    return [state, start, step] {
        return start + step * static_cast<double>(state->fetch_add(1));
    };
}

struct TokenUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct GenerationRecord {
    std::string raw_text;
    double latency_seconds = 0.0;
    std::optional<TokenUsage> usage;
};

struct HealthStatus {
    bool healthy = false;
    std::string detail;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string name() const = 0;
    virtual GenerationRecord generate(const AgentConfig& agent, const PromptBundle& prompt) = 0;
    virtual HealthStatus probe() { return {true, "ok"}; }
};

using BackendSet = std::map<std::string, std::shared_ptr<Backend>>;

// ---- Scripted ---------------------------------------------------------

// Replays canned responses. Resolution order per request: the exact
// entry:role:round queue, then the role:round queue, then the global queue,
// then the per-role constant default. Running dry is an error, not a silent
// repeat.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::string name, ClockFn clock = counting_clock_fn())
        : name_(std::move(name)), clock_(std::move(clock)) {}

    std::string name() const override { return name_; }

    void enqueue_for(int entry_id, Role role, int round, std::string text) {
        std::lock_guard lock(mutex_);
        keyed_[key_of(entry_id, role, round)].push_back(std::move(text));
    }

    void enqueue_for(Role role, int round, std::string text) {
        std::lock_guard lock(mutex_);
        keyed_[key_of(role, round)].push_back(std::move(text));
    }

    void enqueue(std::string text) {
        std::lock_guard lock(mutex_);
        global_.push_back(std::move(text));
    }

    void set_default(Role role, std::string text) {
        std::lock_guard lock(mutex_);
        defaults_[to_string(role)] = std::move(text);
    }

    GenerationRecord generate(const AgentConfig&, const PromptBundle& prompt) override {
        const double t0 = clock_();
        std::string text;
        {
            std::lock_guard lock(mutex_);
            text = next_response(prompt);
            ++consumed_;
        }
        const double t1 = clock_();
        return GenerationRecord{std::move(text), t1 - t0, std::nullopt};
    }

    std::size_t consumed() const { return consumed_; }

private:
    static std::string key_of(int entry_id, Role role, int round) {
        return std::to_string(entry_id) + ":" + to_string(role) + ":" + std::to_string(round);
    }
    static std::string key_of(Role role, int round) {
        return to_string(role) + ":" + std::to_string(round);
    }

    std::string next_response(const PromptBundle& prompt) {
        for (const auto& key : {key_of(prompt.entry_id, prompt.role, prompt.round_index),
                                key_of(prompt.role, prompt.round_index)}) {
            auto it = keyed_.find(key);
            if (it != keyed_.end() && !it->second.empty()) {
                std::string text = std::move(it->second.front());
                it->second.pop_front();
                return text;
            }
        }
        if (!global_.empty()) {
            std::string text = std::move(global_.front());
            global_.pop_front();
            return text;
        }
        auto it = defaults_.find(to_string(prompt.role));
        if (it != defaults_.end()) return it->second;
        throw ScriptExhausted("no scripted response left for " +
                              key_of(prompt.entry_id, prompt.role, prompt.round_index) +
                              " on backend " + name_);
    }

    std::string name_;
    ClockFn clock_;
    mutable std::mutex mutex_;
    std::map<std::string, std::deque<std::string>> keyed_;
    std::deque<std::string> global_;
    std::map<std::string, std::string> defaults_;
    std::atomic<std::size_t> consumed_{0};
};

// ---- Stochastic --------------------------------------------------------

struct StochasticPolicy {
    double agree_probability = 0.7;
    double leader_clear_probability = 0.0;
    double parse_failure_probability = 0.0;
    // Probability that a disagreeing follower offers its own question.
    double alt_question_probability = 0.5;
};

// Synthetic agent with reproducible randomness. Each (entry, model, role,
// round, attempt) tuple gets its own substream, so two followers of the same
// round draw independently and a regeneration after a parse failure sees
// fresh draws.
class StochasticBackend : public Backend {
public:
    StochasticBackend(std::string name, std::uint64_t seed, StochasticPolicy policy,
                      ClockFn clock = counting_clock_fn())
        : name_(std::move(name)), seed_(seed), policy_(policy), clock_(std::move(clock)) {}

    std::string name() const override { return name_; }

    GenerationRecord generate(const AgentConfig&, const PromptBundle& prompt) override {
        const double t0 = clock_();
        const std::string key = std::to_string(prompt.entry_id) + ":" + to_string(prompt.role) +
                                ":" + std::to_string(prompt.round_index);
        int attempt = 0;
        {
            std::lock_guard lock(mutex_);
            attempt = attempts_[key]++;
        }
        SeededRng rng(derive_stream(seed_, {static_cast<std::uint64_t>(prompt.entry_id),
                                            fnv1a64(name_), fnv1a64(to_string(prompt.role)),
                                            static_cast<std::uint64_t>(prompt.round_index),
                                            static_cast<std::uint64_t>(attempt)}));
        std::string text;
        if (rng.next_bernoulli(policy_.parse_failure_probability)) {
            text = "I am not sure how to respond to this.";
        } else if (prompt.role == Role::Follower) {
            text = follower_text(rng);
        } else {
            text = proposal_text(rng);
        }
        const double t1 = clock_();
        return GenerationRecord{std::move(text), t1 - t0, std::nullopt};
    }

private:
    std::string proposal_text(SeededRng& rng) {
        Proposal p;
        if (rng.next_bernoulli(policy_.leader_clear_probability)) {
            p.reasoning = "The instruction names every object it refers to.";
            p.verdict = Verdict::clear();
        } else {
            p.reasoning = "The instruction leaves at least one referent underspecified.";
            p.verdict = Verdict::ask("Could you state exactly which objects you mean?");
        }
        return render_proposal_text(p);
    }

    std::string follower_text(SeededRng& rng) {
        FollowerFeedback f;
        if (rng.next_bernoulli(policy_.agree_probability)) {
            f.stance = FollowerFeedback::Stance::Agree;
            f.reasoning = "The proposal handles the instruction correctly.";
        } else {
            f.stance = FollowerFeedback::Stance::Disagree;
            f.reasoning = "The proposal misses part of the ambiguity.";
            if (rng.next_bernoulli(policy_.alt_question_probability))
                f.alternative_question = "Should the operator restate the instruction precisely?";
        }
        return render_feedback_text(f);
    }

    std::string name_;
    std::uint64_t seed_;
    StochasticPolicy policy_;
    ClockFn clock_;
    std::mutex mutex_;
    std::map<std::string, int> attempts_;
};

// ---- HTTP --------------------------------------------------------------

struct HttpOptions {
    std::string endpoint;       // falls back to LLM_ENDPOINT, then localhost:8000
    std::string api_key;        // falls back to LLM_API_KEY, may stay empty
    double timeout_seconds = 120.0;
    int max_transport_retries = 2;
    double retry_backoff_seconds = 0.25;
};

namespace detail {

struct EndpointParts {
    std::string base;        // scheme://host[:port]
    std::string path_prefix; // "" or "/something", never ending in "/v1"
};

inline EndpointParts split_endpoint(std::string endpoint) {
    while (!endpoint.empty() && endpoint.back() == '/') endpoint.pop_back();
    const auto scheme_end = endpoint.find("://");
    const auto path_start =
        endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    EndpointParts parts;
    if (path_start == std::string::npos) {
        parts.base = endpoint;
    } else {
        parts.base = endpoint.substr(0, path_start);
        parts.path_prefix = endpoint.substr(path_start);
    }
    if (parts.path_prefix.size() >= 3 &&
        parts.path_prefix.compare(parts.path_prefix.size() - 3, 3, "/v1") == 0)
        parts.path_prefix.resize(parts.path_prefix.size() - 3);
    return parts;
}

} // namespace detail

// Chat-completions client. A fresh connection per request keeps requests
// independent; transport failures are retried with exponential backoff, HTTP
// error statuses are not.
class HttpBackend : public Backend {
public:
    HttpBackend(std::string name, HttpOptions options = {}, ClockFn clock = steady_clock_fn())
        : name_(std::move(name)), options_(std::move(options)), clock_(std::move(clock)) {
        if (options_.endpoint.empty()) {
            const char* env = std::getenv("LLM_ENDPOINT");
            options_.endpoint = env && *env ? env : "http://localhost:8000";
        }
        if (options_.api_key.empty()) {
            const char* env = std::getenv("LLM_API_KEY");
            if (env) options_.api_key = env;
        }
        parts_ = detail::split_endpoint(options_.endpoint);
    }

    std::string name() const override { return name_; }

    GenerationRecord generate(const AgentConfig& agent, const PromptBundle& prompt) override {
        json body = json::object();
        body["model"] = agent.model_name;
        body["messages"] = json::array({
            json{{"role", "system"}, {"content", prompt.system_text}},
            json{{"role", "user"}, {"content", prompt.user_text}},
        });
        body["temperature"] = agent.temperature;
        body["max_tokens"] = agent.max_tokens;
        const std::string payload = body.dump();

        const double t0 = clock_();
        httplib::Result res = post_with_retries(parts_.path_prefix + "/v1/chat/completions",
                                                payload);
        const double t1 = clock_();

        if (!res)
            throw NetworkError("request to " + options_.endpoint + " failed: " +
                               httplib::to_string(res.error()));
        if (res->status != 200)
            throw HttpStatusError(res->status,
                                  "chat completion returned status " +
                                      std::to_string(res->status) + ": " + snippet(res->body));

        json reply;
        try {
            reply = json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError("response body", e.what());
        }
        if (!reply.contains("choices") || !reply["choices"].is_array() ||
            reply["choices"].empty())
            throw SchemaError("response.choices", "missing or empty");
        const json& choice = reply["choices"][0];
        if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object())
            throw SchemaError("response.choices[0].message", "missing or not an object");
        const json& message = choice["message"];
        if (!message.contains("content") || !message["content"].is_string())
            throw SchemaError("response.choices[0].message.content", "missing or not a string");

        GenerationRecord record;
        record.raw_text = message["content"].get<std::string>();
        record.latency_seconds = t1 - t0;
        if (reply.contains("usage") && reply["usage"].is_object()) {
            TokenUsage usage;
            usage.prompt_tokens = reply["usage"].value("prompt_tokens", 0);
            usage.completion_tokens = reply["usage"].value("completion_tokens", 0);
            record.usage = usage;
        }
        return record;
    }

    HealthStatus probe() override {
        auto client = make_client();
        auto res = client->Get(parts_.path_prefix + "/v1/models");
        if (!res)
            return {false, "cannot reach " + options_.endpoint + ": " +
                               httplib::to_string(res.error())};
        if (res->status != 200)
            return {false, "model listing returned status " + std::to_string(res->status)};
        return {true, "endpoint " + options_.endpoint + " is reachable"};
    }

private:
    static std::string snippet(const std::string& body) {
        constexpr std::size_t limit = 200;
        return body.size() <= limit ? body : body.substr(0, limit) + "...";
    }

    std::unique_ptr<httplib::Client> make_client() const {
        auto client = std::make_unique<httplib::Client>(parts_.base);
        const auto timeout =
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::duration<double>(options_.timeout_seconds));
        client->set_connection_timeout(timeout);
        client->set_read_timeout(timeout);
        client->set_write_timeout(timeout);
        if (!options_.api_key.empty()) client->set_bearer_token_auth(options_.api_key);
        return client;
    }

    httplib::Result post_with_retries(const std::string& path, const std::string& payload) {
        httplib::Result res;
        for (int attempt = 0; attempt <= options_.max_transport_retries; ++attempt) {
            if (attempt > 0 && options_.retry_backoff_seconds > 0.0) {
                const double backoff = options_.retry_backoff_seconds * (1 << (attempt - 1));
                std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            }
            auto client = make_client();
            res = client->Post(path, payload, "application/json");
            if (res) return res;
        }
        return res;
    }

    std::string name_;
    HttpOptions options_;
    ClockFn clock_;
    detail::EndpointParts parts_;
};

} // namespace ambidebate
