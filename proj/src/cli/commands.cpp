#include "urag/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "urag/core/dataset.hpp"
#include "urag/core/rng.hpp"
#include "urag/eval/protocol.hpp"
#include "urag/providers/http.hpp"
#include "urag/retrieval/index.hpp"
#include "urag/strategies/raptor.hpp"

namespace urag::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered = nlohmann::ordered_json;

namespace {

struct RunAssets {
    std::vector<core::McqaInstance> dataset;
    std::vector<core::Document> corpus;
    providers::Providers providers;
    strategies::PromptLibrary prompts;
    std::unique_ptr<retrieval::VectorIndex> index;
    std::unique_ptr<strategies::RaptorTree> tree;
    strategies::StrategyKind strategy;
};

RunAssets load_run_assets(const CliConfig& config, bool needs_nli) {
    RunAssets assets;
    assets.strategy = strategies::parse_strategy(config.strategy);
    const bool needs_embedder = assets.strategy != strategies::StrategyKind::NoRetrieve;
    validate_config(config, needs_embedder, needs_nli);

    if (config.dataset.empty()) throw core::UsageError("dataset", "dataset path required");
    assets.dataset = core::load_dataset(config.dataset);
    if (assets.dataset.empty()) throw core::UsageError("dataset", "dataset file is empty");

    assets.providers = build_providers(config);
    assets.prompts = strategies::PromptLibrary::defaults();
    if (!config.prompts_dir.empty()) assets.prompts.load_dir(config.prompts_dir);

    if (needs_embedder) {
        if (config.corpus.empty())
            throw core::UsageError("corpus", "strategy '" + config.strategy +
                                                 "' needs a corpus file");
        assets.corpus = core::load_corpus(config.corpus);
        std::string corpus_ref =
            assets.dataset.empty() ? "" : assets.dataset.front().corpus_ref;
        assets.index = std::make_unique<retrieval::VectorIndex>(
            retrieval::build_index(assets.corpus, *assets.providers.embedder, corpus_ref));
        if (assets.strategy == strategies::StrategyKind::Raptor) {
            assets.tree = std::make_unique<strategies::RaptorTree>(strategies::build_raptor_tree(
                assets.corpus, config.strategy_config, *assets.providers.embedder,
                *assets.providers.chat, assets.prompts, corpus_ref));
        }
    }
    return assets;
}

eval::EvalInputs make_inputs(const CliConfig& config, const RunAssets& assets,
                             const core::SplitSpec& split) {
    eval::EvalInputs inputs;
    inputs.dataset = &assets.dataset;
    inputs.split = &split;
    inputs.strategy = assets.strategy;
    inputs.config = config.strategy_config;
    inputs.config.name = config.strategy;
    inputs.config.seed = config.seed;
    inputs.protocol.kind = eval::parse_protocol(config.protocol);
    inputs.protocol.injected_count = config.protocol_spec.injected_count;
    inputs.protocol.fresh_per_step = config.protocol_spec.fresh_per_step;
    inputs.protocol.k_list = config.protocol_spec.k_list;
    inputs.protocol.base = config.protocol_spec.base;
    inputs.providers = assets.providers;
    inputs.index = assets.index.get();
    inputs.tree = assets.tree.get();
    inputs.corpus = &assets.corpus;
    inputs.prompts = &assets.prompts;
    inputs.options.alpha = config.alpha;
    inputs.options.seed = config.seed;
    inputs.options.concurrency = config.providers.concurrency;
    inputs.options.force_nonempty = config.force_nonempty;
    inputs.options.one_hot_fallback = config.one_hot_fallback;
    inputs.options.cr_floor = config.cr_floor;
    inputs.options.wrong_aware_swap_second = config.wrong_aware_swap_second;
    inputs.options.config_hash = config_hash(config);
    inputs.options.dataset_name = fs::path(config.dataset).stem().string();
    if (!config.calibration_models.empty()) {
        fs::path dir(config.calibration_models);
        inputs.options.model_lac_override =
            conformal::load_model((dir / "model_lac.json").string());
        inputs.options.model_aps_override =
            conformal::load_model((dir / "model_aps.json").string());
    }
    return inputs;
}

void write_config_artifact(const CliConfig& config, const std::string& dir) {
    fs::create_directories(dir);
    ordered j = config_to_json(config);
    j["config_hash"] = config_hash(config);
    std::ofstream out(fs::path(dir) / "config.json", std::ios::binary);
    out << j.dump(2) << '\n';
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

int cmd_run(const CliConfig& config) {
    RunAssets assets = load_run_assets(config, /*needs_nli=*/false);
    core::SplitSpec split =
        core::split(assets.dataset, config.calibration_fraction, config.seed);

    write_config_artifact(config, config.out);

    bool violated = false;
    if (eval::parse_protocol(config.protocol) == eval::ProtocolKind::DepthSweep) {
        eval::EvalInputs inputs = make_inputs(config, assets, split);
        auto reports = eval::depth_sweep(inputs);
        for (const auto& report : reports) {
            std::string sub = (fs::path(config.out) / ("k_" + report.metadata.at("k"))).string();
            eval::save_report(report, sub);
            if (!report.invariant_violations.empty()) violated = true;
            std::cout << eval::render_summary(report);
        }
    } else {
        eval::EvalInputs inputs = make_inputs(config, assets, split);
        eval::RunReport report = eval::run_protocol(inputs);
        eval::save_report(report, config.out);
        std::cout << eval::render_summary(report);
        violated = !report.invariant_violations.empty();
    }
    return violated ? kExitInvariant : kExitOk;
}

int cmd_calibrate(const CliConfig& config) {
    RunAssets assets = load_run_assets(config, /*needs_nli=*/false);
    core::SplitSpec split =
        core::split(assets.dataset, config.calibration_fraction, config.seed);

    providers::ScoreOptionsConfig score_config;
    score_config.one_hot_fallback = config.one_hot_fallback;
    strategies::StrategyConfig strategy_config = config.strategy_config;
    strategy_config.seed = config.seed;
    strategies::StrategyRunner runner(assets.strategy, strategy_config, assets.providers,
                                      assets.index.get(), assets.tree.get(), &assets.corpus,
                                      &assets.prompts, score_config);

    std::set<std::string> cal_ids(split.calibration_ids.begin(), split.calibration_ids.end());
    strategies::ProtocolOverlay overlay;
    overlay.run_seed = config.seed;

    std::vector<conformal::ScoredInstance> scored;
    ordered records = ordered::array();
    for (const auto& inst : assets.dataset) {
        if (!cal_ids.count(inst.id)) continue;
        auto trace = runner.run(inst, overlay);
        if (!trace.flags.empty()) continue;  // degraded records stay out of the threshold
        scored.push_back({inst.id, trace.final_distribution, inst.answer_index});
        ordered rec;
        rec["instance_id"] = inst.id;
        rec["gold_index"] = inst.answer_index;
        rec["distribution"] = trace.final_distribution.probs;
        records.push_back(std::move(rec));
    }
    if (scored.empty()) throw core::ArgumentError("calibrate: no usable calibration records");

    auto lac = conformal::calibrate(scored, core::ScoreMethod::LAC, config.alpha);
    auto aps = conformal::calibrate(scored, core::ScoreMethod::APS, config.alpha);

    fs::create_directories(config.out);
    write_config_artifact(config, config.out);
    conformal::save_model(lac, (fs::path(config.out) / "model_lac.json").string());
    conformal::save_model(aps, (fs::path(config.out) / "model_aps.json").string());
    {
        std::ofstream out(fs::path(config.out) / "calibration_records.jsonl", std::ios::binary);
        for (const auto& r : records) out << r.dump() << '\n';
    }
    std::cout << "calibrated n=" << scored.size() << " alpha=" << config.alpha
              << " q_hat_lac=" << (lac.infinite() ? "inf" : format_double(lac.q_hat))
              << " q_hat_aps=" << (aps.infinite() ? "inf" : format_double(aps.q_hat)) << "\n";
    return kExitOk;
}

int cmd_forge(const ForgeArgs& args) {
    const CliConfig& config = args.config;
    if (args.seeds_path.empty()) throw core::UsageError("seeds", "seed QA pairs file required");
    std::ifstream in(args.seeds_path);
    if (!in) throw core::UsageError("seeds", "cannot open seed file: " + args.seeds_path);

    validate_config(config, /*needs_embedder=*/!config.corpus.empty(), /*needs_nli=*/true);
    providers::Providers providers = build_providers(config);
    if (!providers.nli && providers.chat)
        providers.nli = std::make_shared<providers::NliOverChatProvider>(providers.chat);
    strategies::PromptLibrary prompts = strategies::PromptLibrary::defaults();
    if (!config.prompts_dir.empty()) prompts.load_dir(config.prompts_dir);

    // optional retrieval of the original document for the full prompt
    std::unique_ptr<retrieval::VectorIndex> index;
    std::vector<core::Document> corpus;
    std::map<std::string, std::string> doc_bodies;
    if (!config.corpus.empty()) {
        corpus = core::load_corpus(config.corpus);
        index = std::make_unique<retrieval::VectorIndex>(
            retrieval::build_index(corpus, *providers.embedder, "forge"));
        for (const auto& d : corpus) doc_bodies[d.id] = d.body;
    }

    struct Seed {
        std::string id, question, answer, context;
    };
    std::vector<Seed> seeds;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (core::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw core::ParseError(std::string("seed record: ") + e.what(), line_number);
        }
        Seed s;
        s.id = j.value("id", "seed-" + std::to_string(line_number));
        s.question = j.at("question").get<std::string>();
        s.answer = j.at("answer").get<std::string>();
        s.context = j.value("context", "");
        seeds.push_back(std::move(s));
    }
    if (seeds.empty()) throw core::UsageError("seeds", "seed file has no records");

    forge::ForgeConfig forge_config = args.forge;
    forge_config.seed = config.seed;

    std::vector<core::McqaInstance> instances;
    std::vector<forge::ForgeVerdict> verdicts;
    fs::create_directories(config.out);
    std::ofstream provenance_out(fs::path(config.out) / "forge_provenance.jsonl",
                                 std::ios::binary);
    for (const auto& seed : seeds) {
        std::string context = seed.context;
        if (context.empty() && index) {
            auto hits = retrieval::search_scored(*index, providers.embedder->embed_one(seed.question), 1);
            if (!hits.empty()) context = doc_bodies.at(hits.front().doc_id);
        }
        auto forged = forge::forge_instance(*providers.chat, *providers.nli, prompts, seed.id,
                                            seed.question, seed.answer, context, "forged",
                                            forge_config);
        instances.push_back(forged.instance);
        verdicts.push_back(forged.verdict);

        ordered p;
        p["instance_id"] = forged.provenance.instance_id;
        p["iterations_used"] = forged.provenance.iterations_used;
        p["difficult"] = forged.provenance.difficult;
        p["not_difficult_flag"] = forged.provenance.not_difficult_flag;
        p["entail_probs_per_iteration"] = forged.provenance.entail_probs_per_iteration;
        p["prompts"] = forged.provenance.prompts;
        p["completions"] = forged.provenance.completions;
        provenance_out << p.dump() << '\n';
    }

    core::save_dataset((fs::path(config.out) / "forged_dataset.jsonl").string(), instances);

    forge::ForgeReport report = forge::forge_report(verdicts, forge_config.max_iterations);
    {
        std::ofstream out(fs::path(config.out) / "iteration_table.csv", std::ios::binary);
        out << "dataset";
        for (std::size_t i = 0; i < report.difficult_percent_by_iteration.size(); ++i) {
            out << ',' << (i == 0 ? std::string("naive") : "iter_" + std::to_string(i));
        }
        out << '\n' << "seeds";
        for (double pct : report.difficult_percent_by_iteration) out << ',' << format_double(pct);
        out << '\n';
    }
    write_config_artifact(config, config.out);
    std::cout << "forged " << instances.size() << " instances; difficult% by iteration:";
    for (double pct : report.difficult_percent_by_iteration) std::cout << ' ' << pct;
    std::cout << "\n";
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& report_dirs, const std::string& out_dir) {
    if (report_dirs.empty()) throw core::UsageError("reports", "need at least one report dir");
    std::vector<eval::RunReport> reports;
    for (const auto& dir : report_dirs) reports.push_back(eval::load_report(dir));

    std::vector<std::string> strategies_order, datasets_order;
    std::map<std::pair<std::string, std::string>, const eval::RunReport*> cells;
    for (const auto& r : reports) {
        if (std::find(strategies_order.begin(), strategies_order.end(), r.strategy) ==
            strategies_order.end())
            strategies_order.push_back(r.strategy);
        if (std::find(datasets_order.begin(), datasets_order.end(), r.dataset) ==
            datasets_order.end())
            datasets_order.push_back(r.dataset);
        cells[{r.strategy, r.dataset}] = &r;
    }

    std::ostringstream text;
    auto panel = [&](const std::string& title, auto value) {
        text << "== " << title << " ==\n";
        text << std::left << std::setw(14) << "strategy";
        for (const auto& d : datasets_order) text << std::setw(14) << d;
        text << '\n';
        for (const auto& s : strategies_order) {
            text << std::setw(14) << s;
            for (const auto& d : datasets_order) {
                auto it = cells.find({s, d});
                if (it == cells.end()) {
                    text << std::setw(14) << "-";
                } else {
                    std::ostringstream v;
                    v << std::fixed << std::setprecision(4) << value(*it->second);
                    text << std::setw(14) << v.str();
                }
            }
            text << '\n';
        }
        text << '\n';
    };
    panel("Acc", [](const eval::RunReport& r) { return r.aggregates.acc; });
    panel("CR", [](const eval::RunReport& r) {
        return 0.5 * (r.aggregates.cr_lac + r.aggregates.cr_aps);
    });
    panel("SS", [](const eval::RunReport& r) { return r.aggregates.ss_headline; });

    std::ostringstream csv;
    csv << "strategy,dataset,protocol,acc,cr_lac,cr_aps,ss_lac,ss_aps,ss_headline,count\n";
    for (const auto& r : reports) {
        csv << r.strategy << ',' << r.dataset << ',' << r.protocol << ','
            << format_double(r.aggregates.acc) << ',' << format_double(r.aggregates.cr_lac) << ','
            << format_double(r.aggregates.cr_aps) << ',' << format_double(r.aggregates.ss_lac)
            << ',' << format_double(r.aggregates.ss_aps) << ','
            << format_double(r.aggregates.ss_headline) << ',' << r.aggregates.count << '\n';
    }

    // cross-run deltas back the confidence-exposure difference figures
    if (reports.size() == 2) {
        const auto& a = reports[0];
        const auto& b = reports[1];
        text << "== Delta (" << b.protocol << " - " << a.protocol << ") ==\n";
        text << std::left << std::setw(14) << "strategy" << std::setw(14) << "d_acc"
             << std::setw(14) << "d_ss" << '\n';
        if (a.strategy == b.strategy) {
            std::ostringstream da, ds;
            da << std::fixed << std::setprecision(4) << (b.aggregates.acc - a.aggregates.acc);
            ds << std::fixed << std::setprecision(4)
               << (b.aggregates.ss_headline - a.aggregates.ss_headline);
            text << std::setw(14) << a.strategy << std::setw(14) << da.str() << std::setw(14)
                 << ds.str() << '\n';
        }
        text << '\n';
        csv << "delta," << b.strategy << "," << b.protocol << "-" << a.protocol << ","
            << format_double(b.aggregates.acc - a.aggregates.acc) << ",,,,,"
            << format_double(b.aggregates.ss_headline - a.aggregates.ss_headline) << ",\n";
    }

    std::cout << text.str();
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream t(fs::path(out_dir) / "tables.txt", std::ios::binary);
        t << text.str();
        std::ofstream c(fs::path(out_dir) / "tables.csv", std::ios::binary);
        c << csv.str();
    }
    return kExitOk;
}

int cmd_synth(const SynthParams& params, const std::string& out_dir) {
    SynthWorld world = make_synth_world(params);
    fs::create_directories(out_dir);
    write_synth_world(world, (fs::path(out_dir) / "synth_dataset.jsonl").string(),
                      (fs::path(out_dir) / "synth_corpus.jsonl").string(),
                      (fs::path(out_dir) / "synth_mock.json").string());
    std::cout << "synth world: n=" << params.instance_count << " K=" << params.option_count
              << " concentration=" << params.concentration << " seed=" << params.seed << "\n";
    return kExitOk;
}

int cmd_prompts_export(const std::string& dir) {
    strategies::PromptLibrary::defaults().export_dir(dir);
    std::cout << "prompt templates exported to " << dir << "\n";
    return kExitOk;
}

}  // namespace urag::cli
