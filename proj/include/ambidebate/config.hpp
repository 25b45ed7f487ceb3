#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ambidebate/backends.hpp"
#include "ambidebate/engine.hpp"
#include "ambidebate/errors.hpp"
#include "ambidebate/metrics.hpp"
#include "ambidebate/types.hpp"

namespace ambidebate {

inline std::vector<AgentConfig> default_roster() {
    std::vector<AgentConfig> roster(3);
    roster[0].model_name = "llama3-8b-instruct";
    roster[1].model_name = "gemma2-9b-it";
    roster[2].model_name = "mistral-7b-instruct";
    return roster;
}

struct BackendSpec {
    std::string kind; // "scripted" | "stochastic" | "http"
    json params = json::object();
};

struct RunConfig {
    std::filesystem::path dataset_path;
    std::filesystem::path output_dir = "out";
    std::optional<std::filesystem::path> templates_dir;
    std::vector<AgentConfig> roster = default_roster();
    // Model name (or "*" for every model) to backend.
    std::map<std::string, BackendSpec> backends;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int max_rounds = 5;
    int parse_retry_budget = 1;
    bool run_baselines = true;
    bool run_debates = true;
    bool fixed_clock = false;
    bool skip_probe = false;
    ReportOptions report;

    const BackendSpec& spec_for(const std::string& model) const {
        auto it = backends.find(model);
        if (it == backends.end()) it = backends.find("*");
        if (it == backends.end())
            throw SchemaError("config.backends", "no backend for model '" + model +
                                                     "' and no '*' fallback");
        return it->second;
    }

    void validate() const {
        if (roster.empty()) throw SchemaError("config.roster", "must not be empty");
        std::map<std::string, int> seen;
        for (const auto& agent : roster) {
            agent.validate();
            if (++seen[agent.model_name] > 1)
                throw SchemaError("config.roster",
                                  "duplicate model name '" + agent.model_name + "'");
        }
        if (max_rounds < 1) throw SchemaError("config.max_rounds", "must be >= 1");
        if (parse_retry_budget < 0)
            throw SchemaError("config.parse_retry_budget", "must be >= 0");
        bool any_stochastic = false;
        for (const auto& agent : roster) {
            const auto& spec = spec_for(agent.model_name);
            if (spec.kind != "scripted" && spec.kind != "stochastic" && spec.kind != "http")
                throw SchemaError("config.backends", "unknown backend kind '" + spec.kind + "'");
            if (spec.kind == "stochastic") any_stochastic = true;
        }
        if (any_stochastic && !seed_given)
            throw SchemaError("config.seed",
                              "a stochastic backend needs an explicit seed for reproducibility");
    }

    DebateConfig debate_config() const {
        DebateConfig cfg;
        cfg.roster = roster;
        cfg.max_rounds = max_rounds;
        cfg.parse_retry_budget = parse_retry_budget;
        cfg.seed = seed;
        return cfg;
    }
};

inline AgentConfig agent_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected agent object");
    if (!j.contains("model")) throw SchemaError(path + ".model", "missing field");
    AgentConfig agent;
    agent.model_name = j.at("model").get<std::string>();
    agent.temperature = j.value("temperature", agent.temperature);
    agent.max_tokens = j.value("max_tokens", agent.max_tokens);
    agent.reasoning_sentence_limit = j.value("sentence_limit", agent.reasoning_sentence_limit);
    agent.validate();
    return agent;
}

inline RunConfig run_config_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected config object");
    RunConfig cfg;
    if (j.contains("dataset")) cfg.dataset_path = j.at("dataset").get<std::string>();
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("templates_dir"))
        cfg.templates_dir = std::filesystem::path(j.at("templates_dir").get<std::string>());
    if (j.contains("roster")) {
        if (!j.at("roster").is_array()) throw SchemaError(path + ".roster", "expected array");
        cfg.roster.clear();
        for (std::size_t i = 0; i < j.at("roster").size(); ++i)
            cfg.roster.push_back(agent_from_json(j.at("roster")[i],
                                                 path + ".roster[" + std::to_string(i) + "]"));
    }
    if (j.contains("backends")) {
        if (!j.at("backends").is_object())
            throw SchemaError(path + ".backends", "expected object");
        for (const auto& [model, spec_json] : j.at("backends").items()) {
            if (!spec_json.is_object() || !spec_json.contains("kind"))
                throw SchemaError(path + ".backends." + model, "expected {kind, params?}");
            BackendSpec spec;
            spec.kind = spec_json.at("kind").get<std::string>();
            if (spec_json.contains("params")) spec.params = spec_json.at("params");
            cfg.backends[model] = std::move(spec);
        }
    }
    if (j.contains("seed")) {
        cfg.seed = j.at("seed").get<std::uint64_t>();
        cfg.seed_given = true;
    }
    cfg.max_rounds = j.value("max_rounds", cfg.max_rounds);
    cfg.parse_retry_budget = j.value("parse_retry_budget", cfg.parse_retry_budget);
    cfg.run_baselines = j.value("run_baselines", cfg.run_baselines);
    cfg.run_debates = j.value("run_debates", cfg.run_debates);
    cfg.fixed_clock = j.value("fixed_clock", cfg.fixed_clock);
    cfg.skip_probe = j.value("skip_probe", cfg.skip_probe);
    if (j.contains("report")) {
        const json& r = j.at("report");
        if (!r.is_object()) throw SchemaError(path + ".report", "expected object");
        if (r.contains("mode"))
            cfg.report.mode =
                judge_mode_from_string(r.at("mode").get<std::string>(), path + ".report.mode");
        cfg.report.non_consensus_counts_as_failure =
            r.value("non_consensus_counts_as_failure",
                    cfg.report.non_consensus_counts_as_failure);
        if (r.contains("term_table"))
            cfg.report.term_table =
                term_table_from_json(r.at("term_table"), path + ".report.term_table");
        if (r.contains("term_table_file"))
            cfg.report.term_table = read_term_table(r.at("term_table_file").get<std::string>());
    }
    return cfg;
}

inline RunConfig read_run_config(const std::filesystem::path& source) {
    std::ifstream in(source);
    if (!in) throw IoError("cannot open config file: " + source.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(source.string(), e.what());
    }
    return run_config_from_json(j, source.string());
}

namespace detail {

inline Role role_from_string(const std::string& s, const std::string& path) {
    if (s == "baseline") return Role::Baseline;
    if (s == "leader") return Role::Leader;
    if (s == "follower") return Role::Follower;
    throw SchemaError(path, "unknown role '" + s + "'");
}

inline std::shared_ptr<Backend> make_scripted(const std::string& model, const json& params,
                                              const ClockFn& clock, const std::string& path) {
    auto backend = std::make_shared<ScriptedBackend>(model, clock);
    if (params.contains("defaults")) {
        const json& defaults = params.at("defaults");
        if (!defaults.is_object()) throw SchemaError(path + ".defaults", "expected object");
        for (const auto& [role_name, text] : defaults.items())
            backend->set_default(role_from_string(role_name, path + ".defaults"),
                                 text.get<std::string>());
    }
    if (params.contains("queue")) {
        if (!params.at("queue").is_array()) throw SchemaError(path + ".queue", "expected array");
        for (const auto& text : params.at("queue")) backend->enqueue(text.get<std::string>());
    }
    if (params.contains("responses")) {
        const json& responses = params.at("responses");
        if (!responses.is_array()) throw SchemaError(path + ".responses", "expected array");
        for (std::size_t i = 0; i < responses.size(); ++i) {
            const json& r = responses[i];
            const std::string rpath = path + ".responses[" + std::to_string(i) + "]";
            if (!r.is_object() || !r.contains("role") || !r.contains("round") ||
                !r.contains("texts"))
                throw SchemaError(rpath, "expected {entry_id?, role, round, texts}");
            const Role role = role_from_string(r.at("role").get<std::string>(), rpath + ".role");
            const int round = r.at("round").get<int>();
            for (const auto& text : r.at("texts")) {
                if (r.contains("entry_id"))
                    backend->enqueue_for(r.at("entry_id").get<int>(), role, round,
                                         text.get<std::string>());
                else
                    backend->enqueue_for(role, round, text.get<std::string>());
            }
        }
    }
    return backend;
}

inline std::shared_ptr<Backend> make_stochastic(const std::string& model, const json& params,
                                                std::uint64_t seed, const ClockFn& clock) {
    StochasticPolicy policy;
    policy.agree_probability = params.value("agree_probability", policy.agree_probability);
    policy.leader_clear_probability =
        params.value("leader_clear_probability", policy.leader_clear_probability);
    policy.parse_failure_probability =
        params.value("parse_failure_probability", policy.parse_failure_probability);
    policy.alt_question_probability =
        params.value("alt_question_probability", policy.alt_question_probability);
    return std::make_shared<StochasticBackend>(model, seed, policy, clock);
}

inline std::shared_ptr<Backend> make_http(const std::string& model, const json& params,
                                          const ClockFn& clock) {
    HttpOptions options;
    options.endpoint = params.value("endpoint", options.endpoint);
    options.api_key = params.value("api_key", options.api_key);
    if (params.contains("api_key_env")) {
        const char* env = std::getenv(params.at("api_key_env").get<std::string>().c_str());
        if (env) options.api_key = env;
    }
    options.timeout_seconds = params.value("timeout_seconds", options.timeout_seconds);
    options.max_transport_retries =
        params.value("max_transport_retries", options.max_transport_retries);
    options.retry_backoff_seconds =
        params.value("retry_backoff_seconds", options.retry_backoff_seconds);
    return std::make_shared<HttpBackend>(model, options, clock);
}

} // namespace detail

inline std::shared_ptr<Backend> make_backend(const std::string& model, const BackendSpec& spec,
                                             std::uint64_t seed, const ClockFn& clock) {
    const std::string path = "config.backends." + model + ".params";
    if (spec.kind == "scripted") return detail::make_scripted(model, spec.params, clock, path);
    if (spec.kind == "stochastic") return detail::make_stochastic(model, spec.params, seed, clock);
    if (spec.kind == "http") return detail::make_http(model, spec.params, clock);
    throw SchemaError("config.backends." + model, "unknown backend kind '" + spec.kind + "'");
}

inline BackendSet make_backends(const RunConfig& cfg, const ClockFn& clock) {
    BackendSet set;
    for (const auto& agent : cfg.roster)
        set[agent.model_name] = make_backend(agent.model_name, cfg.spec_for(agent.model_name),
                                             cfg.seed, clock);
    return set;
}

} // namespace ambidebate
