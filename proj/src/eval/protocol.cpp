#include "urag/eval/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>
#include <thread>
#include <unordered_map>

#include "urag/core/rng.hpp"
#include "urag/core/text.hpp"

namespace urag::eval {

ProtocolKind parse_protocol(const std::string& name) {
    std::string n = core::to_lower(core::trim(name));
    if (n == "normal") return ProtocolKind::Normal;
    if (n == "self_aware" || n == "self-aware" || n == "selfaware") return ProtocolKind::SelfAware;
    if (n == "wrong_aware" || n == "wrong-aware" || n == "wrongaware")
        return ProtocolKind::WrongAware;
    if (n == "irrelevant_context" || n == "irrelevant-context" || n == "irrelevant")
        return ProtocolKind::IrrelevantContext;
    if (n == "knowledge_isolation" || n == "knowledge-isolation")
        return ProtocolKind::KnowledgeIsolation;
    if (n == "depth_sweep" || n == "depth-sweep") return ProtocolKind::DepthSweep;
    throw core::UsageError("protocol", "unknown protocol '" + name + "'");
}

const char* protocol_name(ProtocolKind kind) {
    switch (kind) {
        case ProtocolKind::Normal: return "normal";
        case ProtocolKind::SelfAware: return "self_aware";
        case ProtocolKind::WrongAware: return "wrong_aware";
        case ProtocolKind::IrrelevantContext: return "irrelevant_context";
        case ProtocolKind::KnowledgeIsolation: return "knowledge_isolation";
        case ProtocolKind::DepthSweep: return "depth_sweep";
    }
    return "?";
}

void ProtocolSpec::validate() const {
    if (kind == ProtocolKind::IrrelevantContext && injected_count < 1)
        throw core::UsageError("protocol.injected_count", "must be >= 1");
    if (kind == ProtocolKind::DepthSweep) {
        if (k_list.empty()) throw core::UsageError("protocol.k_list", "must be non-empty");
        for (std::size_t i = 1; i < k_list.size(); ++i) {
            if (k_list[i] <= k_list[i - 1])
                throw core::UsageError("protocol.k_list", "must be strictly increasing");
        }
        if (base == ProtocolKind::DepthSweep || base == ProtocolKind::KnowledgeIsolation)
            throw core::UsageError("protocol.base", "unsupported base protocol for a sweep");
    }
}

std::string apply_self_aware(const std::string& prompt_with_placeholder,
                             const core::OptionDistribution& distribution) {
    const std::string token = "{confidence_block}";
    auto pos = prompt_with_placeholder.find(token);
    if (pos == std::string::npos)
        throw core::ProtocolError("apply_self_aware: prompt has no {confidence_block} placeholder");
    std::string out = prompt_with_placeholder;
    out.replace(pos, token.size(), strategies::render_confidence_block(distribution));
    if (out.find(token) != std::string::npos)
        throw core::ProtocolError("apply_self_aware: multiple {confidence_block} placeholders");
    return out;
}

core::OptionDistribution apply_wrong_aware(const core::OptionDistribution& distribution,
                                           bool swap_second) {
    if (distribution.size() < 2)
        throw core::ArgumentError("apply_wrong_aware: need at least 2 options");
    std::vector<double> p = distribution.probs;
    std::size_t hi = core::stable_argmax(p);  // first maximum
    std::size_t lo = 0;
    if (swap_second) {
        // first second-highest among the remaining entries
        std::size_t best = hi == 0 ? 1 : 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (i != hi && p[i] > p[best]) best = i;
        }
        lo = best;
    } else {
        // last minimum
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] <= p[lo]) lo = i;
        }
    }
    std::swap(p[hi], p[lo]);
    return core::OptionDistribution(p);
}

std::pair<std::vector<std::string>, std::vector<std::string>> knowledge_isolation_split(
    const std::vector<core::McqaInstance>& dataset, const RunReport& baseline_report) {
    std::unordered_map<std::string, const InstanceRecord*> by_id;
    for (const auto& r : baseline_report.records) by_id[r.instance_id] = &r;

    std::vector<std::string> missing;
    std::vector<std::string> correct, incorrect;
    for (const auto& inst : dataset) {
        auto it = by_id.find(inst.id);
        if (it == by_id.end() || !it->second->usable()) {
            missing.push_back(inst.id);
            continue;
        }
        (it->second->top1_correct ? correct : incorrect).push_back(inst.id);
    }
    if (!missing.empty()) {
        throw core::ProtocolError("knowledge_isolation_split: baseline report missing instances: " +
                                  core::join(missing, ", "));
    }
    return {std::move(correct), std::move(incorrect)};
}

namespace {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

struct PassResult {
    core::StrategyTrace trace;
    std::string failure;
};

std::vector<PassResult> run_pass(const strategies::StrategyRunner& runner,
                                 const std::vector<const core::McqaInstance*>& instances,
                                 const std::vector<strategies::ProtocolOverlay>& overlays,
                                 int concurrency) {
    std::vector<PassResult> results(instances.size());
    parallel_for(instances.size(), concurrency, [&](std::size_t i) {
        try {
            results[i].trace = runner.run(*instances[i], overlays[i]);
        } catch (const std::exception& e) {
            results[i].failure = e.what();
        }
    });
    return results;
}

Aggregates full_aggregates(const std::vector<InstanceRecord>& records) {
    Aggregates a;
    auto lac = aggregate(records, core::ScoreMethod::LAC);
    auto aps = aggregate(records, core::ScoreMethod::APS);
    a.acc = lac.acc;
    a.cr_lac = lac.cr;
    a.cr_aps = aps.cr;
    a.ss_lac = lac.ss;
    a.ss_aps = aps.ss;
    a.ss_headline = 0.5 * (lac.ss + aps.ss);
    a.count = lac.count;
    return a;
}

}  // namespace

RunReport run_protocol(const EvalInputs& inputs) {
    if (!inputs.dataset || !inputs.split || !inputs.prompts)
        throw core::ArgumentError("run_protocol: dataset, split and prompts are required");
    inputs.protocol.validate();
    inputs.config.validate();
    if (inputs.protocol.kind == ProtocolKind::DepthSweep)
        throw core::ArgumentError("run_protocol: use depth_sweep() for sweep protocols");

    const auto& dataset = *inputs.dataset;
    const auto& split = *inputs.split;

    // split must cover the dataset exactly once
    std::set<std::string> dataset_ids, split_ids;
    for (const auto& inst : dataset) dataset_ids.insert(inst.id);
    for (const auto& id : split.calibration_ids) {
        if (!split_ids.insert(id).second)
            throw core::ArgumentError("run_protocol: id '" + id + "' duplicated in split");
    }
    for (const auto& id : split.test_ids) {
        if (!split_ids.insert(id).second)
            throw core::ArgumentError("run_protocol: id '" + id +
                                      "' appears in both split halves");
    }
    if (split_ids != dataset_ids)
        throw core::ArgumentError("run_protocol: split does not cover the dataset exactly");
    if (split.calibration_ids.empty())
        throw core::ArgumentError("run_protocol: calibration split is empty");

    // deterministic id order for evaluation and assembly
    std::vector<const core::McqaInstance*> ordered;
    ordered.reserve(dataset.size());
    for (const auto& inst : dataset) ordered.push_back(&inst);
    std::sort(ordered.begin(), ordered.end(),
              [](const auto* a, const auto* b) { return a->id < b->id; });

    std::set<std::string> calibration_ids(split.calibration_ids.begin(),
                                          split.calibration_ids.end());

    providers::ScoreOptionsConfig score_config;
    score_config.one_hot_fallback = inputs.options.one_hot_fallback;

    strategies::StrategyRunner runner(inputs.strategy, inputs.config, inputs.providers,
                                      inputs.index, inputs.tree, inputs.corpus, inputs.prompts,
                                      score_config);

    strategies::ProtocolOverlay base_overlay;
    base_overlay.run_seed = inputs.options.seed;
    if (inputs.protocol.kind == ProtocolKind::IrrelevantContext) {
        base_overlay.inject_irrelevant = inputs.protocol.injected_count;
        base_overlay.inject_fresh_per_step = inputs.protocol.fresh_per_step;
    }

    const bool aware = inputs.protocol.kind == ProtocolKind::SelfAware ||
                       inputs.protocol.kind == ProtocolKind::WrongAware;

    // prior pass for confidence exposure; fresh retrieval, both traces kept
    std::vector<PassResult> prior;
    if (aware) {
        std::vector<strategies::ProtocolOverlay> overlays(ordered.size());
        for (auto& o : overlays) o.run_seed = inputs.options.seed;
        prior = run_pass(runner, ordered, overlays, inputs.options.concurrency);
    }

    std::vector<strategies::ProtocolOverlay> overlays(ordered.size(), base_overlay);
    std::vector<std::string> pre_failures(ordered.size());
    if (aware) {
        for (std::size_t i = 0; i < ordered.size(); ++i) {
            if (!prior[i].failure.empty()) {
                pre_failures[i] = "prior pass missing: " + prior[i].failure;
                continue;
            }
            const auto& dist = prior[i].trace.final_distribution;
            core::OptionDistribution display =
                inputs.protocol.kind == ProtocolKind::WrongAware
                    ? apply_wrong_aware(dist, inputs.options.wrong_aware_swap_second)
                    : dist;
            overlays[i].confidence_block = strategies::render_confidence_block(display);
        }
    }

    std::vector<PassResult> results(ordered.size());
    {
        std::vector<const core::McqaInstance*> todo;
        std::vector<strategies::ProtocolOverlay> todo_overlays;
        std::vector<std::size_t> todo_index;
        for (std::size_t i = 0; i < ordered.size(); ++i) {
            if (pre_failures[i].empty()) {
                todo.push_back(ordered[i]);
                todo_overlays.push_back(overlays[i]);
                todo_index.push_back(i);
            } else {
                results[i].failure = pre_failures[i];
            }
        }
        auto ran = run_pass(runner, todo, todo_overlays, inputs.options.concurrency);
        for (std::size_t j = 0; j < ran.size(); ++j) results[todo_index[j]] = std::move(ran[j]);
    }

    RunReport report;
    report.strategy = strategies::strategy_name(inputs.strategy);
    report.dataset = inputs.options.dataset_name;
    report.protocol = protocol_name(inputs.protocol.kind);
    report.alpha = inputs.options.alpha;
    report.seed = inputs.options.seed;
    report.config_hash = inputs.options.config_hash;
    if (inputs.providers.chat) report.provider_identities.push_back(inputs.providers.chat->identity());
    if (inputs.providers.embedder)
        report.provider_identities.push_back(inputs.providers.embedder->identity());
    if (inputs.providers.nli) report.provider_identities.push_back(inputs.providers.nli->identity());
    report.metadata["k"] = std::to_string(inputs.config.retrieval_depth);
    report.metadata["n_calibration"] = std::to_string(split.calibration_ids.size());
    report.metadata["n_test"] = std::to_string(split.test_ids.size());
    if (inputs.protocol.kind == ProtocolKind::IrrelevantContext) {
        report.metadata["injected_count"] = std::to_string(inputs.protocol.injected_count);
        report.metadata["fresh_per_step"] = inputs.protocol.fresh_per_step ? "true" : "false";
    }
    if (inputs.options.one_hot_fallback) report.watermarks.push_back("one_hot_fallback_enabled");
    if (inputs.options.force_nonempty) report.watermarks.push_back("force_nonempty_enabled");
    if (inputs.protocol.kind == ProtocolKind::WrongAware) {
        report.watermarks.push_back(inputs.options.wrong_aware_swap_second
                                        ? "wrong_aware_swap=highest_second"
                                        : "wrong_aware_swap=highest_lowest");
    }
    if (inputs.strategy == strategies::StrategyKind::Raptor) {
        report.watermarks.push_back("raptor_reducer=" + inputs.config.raptor.reducer);
    }

    report.records.reserve(ordered.size());
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        const auto& inst = *ordered[i];
        InstanceRecord record;
        record.instance_id = inst.id;
        record.gold_index = inst.answer_index;
        record.in_calibration = calibration_ids.count(inst.id) > 0;
        record.failure = results[i].failure;
        if (record.usable()) {
            record.trace = std::move(results[i].trace);
            record.distribution = record.trace.final_distribution;
            record.top1 = core::stable_argmax(record.distribution.probs);
            record.top1_correct = record.top1 == record.gold_index;
            record.flags = record.trace.flags;
            record.notes = record.trace.notes;
        }
        if (aware && i < prior.size() && prior[i].failure.empty()) {
            record.prior_trace = std::move(prior[i].trace);
            record.prior_distribution = record.prior_trace->final_distribution;
        }
        report.records.push_back(std::move(record));
    }

    // conformal calibration on clean calibration records
    const bool preloaded =
        inputs.options.model_lac_override && inputs.options.model_aps_override;
    std::vector<conformal::ScoredInstance> calibration_scored;
    for (const auto& r : report.records) {
        if (r.in_calibration && r.headline_eligible()) {
            calibration_scored.push_back({r.instance_id, r.distribution, r.gold_index});
        }
    }
    if (preloaded) {
        report.model_lac = *inputs.options.model_lac_override;
        report.model_aps = *inputs.options.model_aps_override;
        report.metadata["calibration"] = "preloaded";
    } else {
        if (calibration_scored.empty())
            throw core::ArgumentError(
                "run_protocol: calibration split has no usable records after exclusions");
        report.model_lac =
            conformal::calibrate(calibration_scored, core::ScoreMethod::LAC, inputs.options.alpha);
        report.model_aps =
            conformal::calibrate(calibration_scored, core::ScoreMethod::APS, inputs.options.alpha);
    }

    for (auto& r : report.records) {
        if (!r.usable()) continue;
        r.set_lac = conformal::predict_set(report.model_lac, r.distribution,
                                           inputs.options.force_nonempty);
        r.set_aps = conformal::predict_set(report.model_aps, r.distribution,
                                           inputs.options.force_nonempty);
    }

    // quality manifest over test records
    std::vector<InstanceRecord> test_included;
    for (const auto& r : report.records) {
        if (r.in_calibration) continue;
        if (!r.usable()) {
            ++report.manifest.failed;
            continue;
        }
        if (!r.flags.empty()) {
            ++report.manifest.flagged_excluded;
            for (const auto& f : r.flags) ++report.manifest.flag_counts[f];
            continue;
        }
        test_included.push_back(r);
    }
    if (test_included.empty())
        throw core::ArgumentError("run_protocol: no usable test records after exclusions");
    report.aggregates = full_aggregates(test_included);

    // knowledge isolation: partition test records by no-retrieve correctness
    if (inputs.protocol.kind == ProtocolKind::KnowledgeIsolation) {
        EvalInputs baseline_inputs = inputs;
        baseline_inputs.strategy = strategies::StrategyKind::NoRetrieve;
        baseline_inputs.protocol = ProtocolSpec{};
        RunReport baseline = run_protocol(baseline_inputs);
        auto [correct_ids, incorrect_ids] = knowledge_isolation_split(dataset, baseline);
        std::set<std::string> correct_set(correct_ids.begin(), correct_ids.end());

        std::vector<InstanceRecord> sub_correct, sub_incorrect;
        for (const auto& r : test_included) {
            (correct_set.count(r.instance_id) ? sub_correct : sub_incorrect).push_back(r);
        }
        for (auto& r : report.records) {
            if (r.in_calibration || !r.usable()) continue;
            r.notes.push_back(correct_set.count(r.instance_id) ? "ki_subset:llm_correct"
                                                               : "ki_subset:llm_incorrect");
        }
        if (!sub_correct.empty())
            report.subset_aggregates["llm_correct"] = full_aggregates(sub_correct);
        if (!sub_incorrect.empty())
            report.subset_aggregates["llm_incorrect"] = full_aggregates(sub_incorrect);
        report.metadata["ki_correct"] = std::to_string(correct_ids.size());
        report.metadata["ki_incorrect"] = std::to_string(incorrect_ids.size());
    }

    // embedded invariants
    {
        std::vector<InstanceRecord> cal_included;
        for (const auto& r : report.records) {
            if (r.in_calibration && r.headline_eligible()) cal_included.push_back(r);
        }
        if (!cal_included.empty() && !preloaded) {
            auto check_resub = [&](const conformal::CalibrationModel& model,
                                   core::ScoreMethod method) {
                if (model.infinite()) return;
                auto agg = aggregate(cal_included, method);
                if (agg.cr + 1e-12 < 1.0 - inputs.options.alpha) {
                    report.invariant_violations.push_back(
                        std::string("resubstitution_coverage_") +
                        core::score_method_name(method));
                }
            };
            check_resub(report.model_lac, core::ScoreMethod::LAC);
            check_resub(report.model_aps, core::ScoreMethod::APS);
        }
        if (inputs.options.cr_floor > 0.0) {
            if (report.aggregates.cr_lac < inputs.options.cr_floor)
                report.invariant_violations.push_back("cr_floor_LAC");
            if (report.aggregates.cr_aps < inputs.options.cr_floor)
                report.invariant_violations.push_back("cr_floor_APS");
        }
    }
    return report;
}

std::vector<RunReport> depth_sweep(const EvalInputs& inputs) {
    inputs.protocol.validate();
    if (inputs.protocol.kind != ProtocolKind::DepthSweep)
        throw core::ArgumentError("depth_sweep: protocol kind must be depth_sweep");

    std::vector<RunReport> reports;
    for (auto k : inputs.protocol.k_list) {
        EvalInputs one = inputs;
        one.config.retrieval_depth = k;
        one.protocol.kind = inputs.protocol.base;
        try {
            RunReport report = run_protocol(one);
            report.protocol = "depth_sweep";
            report.metadata["k"] = std::to_string(k);
            report.metadata["base_protocol"] = protocol_name(inputs.protocol.base);
            reports.push_back(std::move(report));
        } catch (const std::exception& e) {
            RunReport failed;
            failed.strategy = strategies::strategy_name(inputs.strategy);
            failed.dataset = inputs.options.dataset_name;
            failed.protocol = "depth_sweep";
            failed.alpha = inputs.options.alpha;
            failed.seed = inputs.options.seed;
            failed.config_hash = inputs.options.config_hash;
            failed.metadata["k"] = std::to_string(k);
            failed.metadata["run_error"] = e.what();
            reports.push_back(std::move(failed));
        }
    }
    return reports;
}

}  // namespace urag::eval
