#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "urag/cli/commands.hpp"

using namespace urag;

namespace {

struct SharedFlags {
    std::string config_path;
    std::string dataset, corpus, out, mock, prompts_dir, calibration_models;
    std::string strategy, protocol;
    double alpha = 0.1, calibration_fraction = 0.5, cr_floor = 0.0;
    std::uint64_t seed = 0;
    std::size_t k = 10, injected_count = 10;
    std::vector<std::size_t> k_list;
    int concurrency = 8;
    bool force_nonempty = false, one_hot_fallback = false, wrong_aware_swap_second = false;
};

void add_shared_options(CLI::App* cmd, SharedFlags& f) {
    cmd->add_option("--config", f.config_path, "config file (JSON)");
    cmd->add_option("--dataset", f.dataset, "dataset file (JSONL)");
    cmd->add_option("--corpus", f.corpus, "corpus file (JSONL)");
    cmd->add_option("--strategy", f.strategy,
                    "no_retrieve|naive|fusion|hyde|raptor|replug|selfrag|rat");
    cmd->add_option("--protocol", f.protocol,
                    "normal|self_aware|wrong_aware|irrelevant_context|knowledge_isolation|"
                    "depth_sweep");
    cmd->add_option("--alpha", f.alpha, "conformal risk level");
    cmd->add_option("--calibration-fraction", f.calibration_fraction, "calibration share");
    cmd->add_option("--seed", f.seed, "run seed");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--mock", f.mock, "mock script file (JSON)");
    cmd->add_option("--prompts", f.prompts_dir, "prompt template directory");
    cmd->add_option("--calibration-models", f.calibration_models,
                    "reuse persisted calibration models from this directory");
    cmd->add_option("--k", f.k, "retrieval depth");
    cmd->add_option("--k-list", f.k_list, "depth sweep k values")->delimiter(',');
    cmd->add_option("--injected-count", f.injected_count, "irrelevant docs per retrieval");
    cmd->add_option("--cr-floor", f.cr_floor, "test coverage floor (0 disables)");
    cmd->add_option("--concurrency", f.concurrency, "provider concurrency bound");
    cmd->add_flag("--force-nonempty", f.force_nonempty, "never emit empty prediction sets");
    cmd->add_flag("--one-hot-fallback", f.one_hot_fallback,
                  "fall back to parsing Answer|X when logprobs are unusable");
    cmd->add_flag("--wrong-aware-swap-second", f.wrong_aware_swap_second,
                  "swap highest with second-highest instead of lowest");
}

// flags > environment > config file
cli::CliConfig resolve_config(CLI::App* cmd, const SharedFlags& f) {
    cli::CliConfig config;
    if (!f.config_path.empty()) config = cli::load_config_file(f.config_path);
    cli::apply_env_overrides(config);
    auto given = [&](const char* name) { return cmd->count(name) > 0; };
    if (given("--dataset")) config.dataset = f.dataset;
    if (given("--corpus")) config.corpus = f.corpus;
    if (given("--strategy")) config.strategy = f.strategy;
    if (given("--protocol")) config.protocol = f.protocol;
    if (given("--alpha")) config.alpha = f.alpha;
    if (given("--calibration-fraction")) config.calibration_fraction = f.calibration_fraction;
    if (given("--seed")) config.seed = f.seed;
    if (given("--out")) config.out = f.out;
    if (given("--mock")) config.mock_script = f.mock;
    if (given("--prompts")) config.prompts_dir = f.prompts_dir;
    if (given("--calibration-models")) config.calibration_models = f.calibration_models;
    if (given("--k")) config.strategy_config.retrieval_depth = f.k;
    if (given("--k-list")) config.protocol_spec.k_list = f.k_list;
    if (given("--injected-count")) config.protocol_spec.injected_count = f.injected_count;
    if (given("--cr-floor")) config.cr_floor = f.cr_floor;
    if (given("--concurrency")) config.providers.concurrency = f.concurrency;
    if (given("--force-nonempty")) config.force_nonempty = f.force_nonempty;
    if (given("--one-hot-fallback")) config.one_hot_fallback = f.one_hot_fallback;
    if (given("--wrong-aware-swap-second"))
        config.wrong_aware_swap_second = f.wrong_aware_swap_second;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"uragc - conformal uncertainty harness for retrieval-augmented MCQA"};
    app.require_subcommand(1);

    SharedFlags run_flags;
    auto* run = app.add_subcommand("run", "run a protocol and emit report artifacts");
    add_shared_options(run, run_flags);

    SharedFlags sweep_flags;
    auto* sweep = app.add_subcommand("depth-sweep", "one full run per retrieval depth k");
    add_shared_options(sweep, sweep_flags);

    SharedFlags cal_flags;
    auto* calibrate = app.add_subcommand("calibrate", "persist calibration models for reuse");
    add_shared_options(calibrate, cal_flags);

    SharedFlags forge_flags;
    std::string forge_seeds, forge_mode = "naive";
    int forge_count = 3, forge_max_iterations = 3;
    double forge_threshold = 0.5;
    auto* forge_cmd = app.add_subcommand("forge", "build an MCQA dataset from seed QA pairs");
    add_shared_options(forge_cmd, forge_flags);
    forge_cmd->add_option("--seeds", forge_seeds, "seed QA pairs (JSONL: id, question, answer)");
    forge_cmd->add_option("--count", forge_count, "distractors per question");
    forge_cmd->add_option("--max-iterations", forge_max_iterations, "regeneration rounds");
    forge_cmd->add_option("--threshold", forge_threshold, "NLI entailment gate threshold");
    forge_cmd->add_option("--mode", forge_mode, "initial prompt: naive|full");

    std::vector<std::string> report_dirs;
    std::string report_out;
    auto* report_cmd = app.add_subcommand("report", "render tables from report directories");
    report_cmd->add_option("dirs", report_dirs, "report directories")->required();
    report_cmd->add_option("--out", report_out, "directory for rendered tables");

    cli::SynthParams synth_params;
    std::string synth_out = "out";
    auto* synth_cmd = app.add_subcommand("synth", "emit a synthetic dataset plus mock script");
    synth_cmd->add_option("--n", synth_params.instance_count, "instance count");
    synth_cmd->add_option("--options", synth_params.option_count, "options per question (K)");
    synth_cmd->add_option("--concentration", synth_params.concentration,
                          "Dirichlet concentration of the scripted distributions");
    synth_cmd->add_option("--seed", synth_params.seed, "generation seed");
    synth_cmd->add_option("--out", synth_out, "output directory");

    std::string prompts_out = "prompts";
    auto* prompts_cmd =
        app.add_subcommand("prompts-export", "write the built-in prompt templates to a directory");
    prompts_cmd->add_option("--out", prompts_out, "target directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cli::cmd_run(resolve_config(run, run_flags));
        }
        if (sweep->parsed()) {
            cli::CliConfig config = resolve_config(sweep, sweep_flags);
            config.protocol = "depth_sweep";
            return cli::cmd_run(config);
        }
        if (calibrate->parsed()) {
            return cli::cmd_calibrate(resolve_config(calibrate, cal_flags));
        }
        if (forge_cmd->parsed()) {
            cli::ForgeArgs args;
            args.config = resolve_config(forge_cmd, forge_flags);
            args.seeds_path = forge_seeds;
            args.forge.distractor_count = forge_count;
            args.forge.max_iterations = forge_max_iterations;
            args.forge.nli_threshold = forge_threshold;
            args.forge.initial_mode =
                forge_mode == "full" ? forge::ForgeMode::Full : forge::ForgeMode::Naive;
            return cli::cmd_forge(args);
        }
        if (report_cmd->parsed()) {
            return cli::cmd_report(report_dirs, report_out);
        }
        if (synth_cmd->parsed()) {
            return cli::cmd_synth(synth_params, synth_out);
        }
        if (prompts_cmd->parsed()) {
            return cli::cmd_prompts_export(prompts_out);
        }
    } catch (const UsageError& e) {
        std::cerr << e.what() << "\n";
        return cli::kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitError;
    }
    return cli::kExitError;
}
