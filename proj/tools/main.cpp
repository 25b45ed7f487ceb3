#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <ambidebate/ambidebate.hpp>

namespace {

using namespace ambidebate;

int exit_code_for(const Error& e) {
    const std::string code = e.code();
    if (code == "E_SCHEMA" || code == "E_PRECONDITION") return 2;
    if (code == "E_IO") return 3;
    if (code == "E_NETWORK" || code == "E_HTTP_STATUS") return 4;
    return 1;
}

void print_error(const Error& e) {
    std::cerr << "error[" << e.code() << "]: " << e.what() << "\n";
}

struct GenerateArgs {
    std::uint64_t seed = 42;
    std::string out = "data/dataset.json";
    int numerical = 20;
    int attribute = 20;
    int spatial = 20;
    std::string vocabulary_file;
};

int cmd_generate(const GenerateArgs& args) {
    Vocabulary vocab =
        args.vocabulary_file.empty() ? Vocabulary::defaults()
                                     : read_vocabulary(args.vocabulary_file);
    const auto dataset =
        generate_dataset(args.seed, {args.numerical, args.attribute, args.spatial}, vocab,
                         ScenarioContext::default_scene());
    const std::filesystem::path out_path(args.out);
    if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
    write_dataset(dataset, out_path);
    std::cout << "wrote " << dataset.size() << " instruction pairs to " << args.out
              << " (seed " << args.seed << ")\n";
    return 0;
}

struct RunArgs {
    std::string config_file;
    std::string dataset;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_rounds;
    std::string templates_dir;
    bool fixed_clock = false;
    bool skip_probe = false;
    bool no_baselines = false;
    bool no_debates = false;
};

RunConfig load_run_config(const RunArgs& args) {
    RunConfig cfg = read_run_config(args.config_file);
    if (!args.dataset.empty()) cfg.dataset_path = args.dataset;
    if (!args.out.empty()) cfg.output_dir = args.out;
    if (args.seed) {
        cfg.seed = *args.seed;
        cfg.seed_given = true;
    }
    if (args.max_rounds) cfg.max_rounds = *args.max_rounds;
    if (!args.templates_dir.empty()) cfg.templates_dir = args.templates_dir;
    if (args.fixed_clock) cfg.fixed_clock = true;
    if (args.skip_probe) cfg.skip_probe = true;
    if (args.no_baselines) cfg.run_baselines = false;
    if (args.no_debates) cfg.run_debates = false;
    cfg.validate();
    if (cfg.dataset_path.empty())
        throw SchemaError("config.dataset", "no dataset file given (config key or --dataset)");
    return cfg;
}

int probe_backends(const RunConfig& cfg, const BackendSet& backends) {
    bool all_healthy = true;
    for (const auto& agent : cfg.roster) {
        const HealthStatus status = backends.at(agent.model_name)->probe();
        std::cout << agent.model_name << ": " << (status.healthy ? "healthy" : "UNHEALTHY")
                  << " (" << status.detail << ")\n";
        all_healthy = all_healthy && status.healthy;
    }
    return all_healthy ? 0 : 4;
}

int cmd_run(const RunArgs& args) {
    const RunConfig cfg = load_run_config(args);
    const ClockFn clock = cfg.fixed_clock ? counting_clock_fn() : steady_clock_fn();

    EngineContext ctx;
    ctx.clock = clock;
    ctx.backends = make_backends(cfg, clock);
    if (cfg.templates_dir) ctx.templates = PromptTemplates::load_from_directory(*cfg.templates_dir);

    if (!cfg.skip_probe) {
        const int probe_status = probe_backends(cfg, ctx.backends);
        if (probe_status != 0) {
            std::cerr << "error[E_NETWORK]: a backend failed its health probe; "
                         "use --skip-probe to run anyway\n";
            return probe_status;
        }
    }

    const auto dataset = read_dataset(cfg.dataset_path);
    std::filesystem::create_directories(cfg.output_dir);
    JsonlExperimentSink sink(cfg.output_dir / "baselines.jsonl",
                             cfg.output_dir / "transcripts.jsonl");

    ExperimentOptions options;
    options.run_baselines = cfg.run_baselines;
    options.run_debates = cfg.run_debates;
    options.progress = [](int done, int total) {
        std::cerr << "entry " << done << "/" << total << " done\n";
    };

    const RunSummary summary =
        run_experiment(ctx, dataset, cfg.debate_config(), sink, options);
    std::cout << "entries=" << summary.entries << " baselines=" << summary.baselines
              << " baseline_errors=" << summary.baseline_errors
              << " debates=" << summary.debates << " consensus=" << summary.consensus
              << " non_consensus=" << summary.non_consensus
              << " errors=" << summary.debate_errors << "\n";
    if (summary.debates > 0 && summary.debate_errors == summary.debates) {
        std::cerr << "error[E_PRECONDITION]: every debate ended in an error\n";
        return 5;
    }
    return 0;
}

struct ReportArgs {
    std::string dataset;
    std::string baselines;
    std::string transcripts;
    std::string out = "out/report";
    std::string mode = "strict";
    bool lenient_non_consensus = false;
    std::string term_table_file;
};

int cmd_report(const ReportArgs& args) {
    const auto dataset = read_dataset(args.dataset);
    std::vector<BaselineRecord> baselines;
    if (!args.baselines.empty()) baselines = read_baselines(args.baselines);
    std::vector<DebateTranscript> transcripts;
    if (!args.transcripts.empty()) transcripts = read_transcripts(args.transcripts);

    ReportOptions options;
    options.mode = judge_mode_from_string(args.mode, "--mode");
    options.non_consensus_counts_as_failure = !args.lenient_non_consensus;
    if (!args.term_table_file.empty()) options.term_table = read_term_table(args.term_table_file);

    const MetricsReport report = compute_report(dataset, baselines, transcripts, options);
    const auto written = emit_reports(report, args.out);
    for (const auto& path : written) std::cout << "wrote " << path.string() << "\n";
    return 0;
}

struct ProbeArgs {
    std::string config_file;
    std::string endpoint;
};

int cmd_probe(const ProbeArgs& args) {
    if (!args.endpoint.empty()) {
        HttpOptions options;
        options.endpoint = args.endpoint;
        HttpBackend backend("probe", options);
        const HealthStatus status = backend.probe();
        std::cout << args.endpoint << ": " << (status.healthy ? "healthy" : "UNHEALTHY") << " ("
                  << status.detail << ")\n";
        return status.healthy ? 0 : 4;
    }
    RunConfig cfg = read_run_config(args.config_file);
    cfg.validate();
    const BackendSet backends = make_backends(cfg, steady_clock_fn());
    return probe_backends(cfg, backends);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"leader-follower debate harness for ambiguous robot instructions"};
    app.require_subcommand(1);

    GenerateArgs gen_args;
    auto* generate = app.add_subcommand(
        "generate", "produce a dataset of paired ambiguous/unambiguous instructions");
    generate->add_option("--seed", gen_args.seed, "generator seed")->capture_default_str();
    generate->add_option("--out", gen_args.out, "dataset file to write")->capture_default_str();
    generate->add_option("--numerical", gen_args.numerical, "entries with vague quantities")
        ->capture_default_str();
    generate->add_option("--attribute", gen_args.attribute, "entries with vague attributes")
        ->capture_default_str();
    generate->add_option("--spatial", gen_args.spatial, "entries with vague spatial relations")
        ->capture_default_str();
    generate->add_option("--vocabulary", gen_args.vocabulary_file,
                         "vocabulary JSON file (defaults to the built-in lists)");

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "run baselines and debates over a dataset");
    run->add_option("--config", run_args.config_file, "run configuration JSON")->required();
    run->add_option("--dataset", run_args.dataset, "override the config's dataset path");
    run->add_option("--out", run_args.out, "override the config's output directory");
    run->add_option("--seed", run_args.seed, "override the config's seed");
    run->add_option("--max-rounds", run_args.max_rounds, "override the round cap");
    run->add_option("--templates-dir", run_args.templates_dir, "load prompt templates from here");
    run->add_flag("--fixed-clock", run_args.fixed_clock,
                  "stamp deterministic timestamps instead of wall time");
    run->add_flag("--skip-probe", run_args.skip_probe, "skip backend health probes");
    run->add_flag("--no-baselines", run_args.no_baselines, "skip single-model baselines");
    run->add_flag("--no-debates", run_args.no_debates, "skip debates");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "aggregate run artifacts into CSV tables");
    report->add_option("--dataset", report_args.dataset, "dataset the run used")->required();
    report->add_option("--baselines", report_args.baselines, "baselines.jsonl from a run");
    report->add_option("--transcripts", report_args.transcripts, "transcripts.jsonl from a run");
    report->add_option("--out", report_args.out, "directory for the CSV and JSON reports")
        ->capture_default_str();
    report->add_option("--mode", report_args.mode, "judge mode: strict or lenient")
        ->capture_default_str();
    report->add_flag("--exclude-non-consensus", report_args.lenient_non_consensus,
                     "drop undecided debates from success denominators");
    report->add_option("--term-table", report_args.term_table_file,
                       "JSON file with generic judge terms");

    ProbeArgs probe_args;
    auto* probe = app.add_subcommand("probe", "check that configured backends are reachable");
    auto* probe_config = probe->add_option("--config", probe_args.config_file,
                                           "run configuration JSON");
    probe->add_option("--endpoint", probe_args.endpoint, "probe one endpoint directly")
        ->excludes(probe_config);

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) return cmd_generate(gen_args);
        if (run->parsed()) return cmd_run(run_args);
        if (report->parsed()) return cmd_report(report_args);
        if (probe->parsed()) {
            if (probe_args.config_file.empty() && probe_args.endpoint.empty()) {
                std::cerr << "error[E_PRECONDITION]: probe needs --config or --endpoint\n";
                return 2;
            }
            return cmd_probe(probe_args);
        }
    } catch (const ambidebate::Error& e) {
        print_error(e);
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error[E_UNEXPECTED]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
