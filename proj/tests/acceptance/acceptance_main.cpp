// Acceptance suite: runs every gate criterion end to end and prints one
// PASS/FAIL line per criterion. Exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <vector>

#include "urag/cli/synth.hpp"
#include "urag/core/dataset.hpp"
#include "urag/core/rng.hpp"
#include "urag/eval/protocol.hpp"
#include "urag/forge/forge.hpp"
#include "urag/providers/mock.hpp"
#include "urag/providers/score_options.hpp"
#include "urag/retrieval/index.hpp"
#include "urag/strategies/gmm.hpp"
#include "urag/strategies/raptor.hpp"
#include "urag/strategies/strategies.hpp"

using namespace urag;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s %2d %-24s %s\n", ok ? "PASS" : "FAIL", number, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fixture(const char* name) {
    return std::string(URAG_FIXTURE_DIR) + "/" + name;
}

struct Check {
    bool ok = true;
    std::ostringstream detail;
    void fail(const std::string& why) {
        ok = false;
        if (detail.tellp() > 0) detail << "; ";
        detail << why;
    }
};

// ---------------------------------------------------------------------------
// 1 & 2: split-conformal coverage and LAC-vs-APS set size on synthetic worlds

struct SeedOutcome {
    double cr_lac, cr_aps, ss_lac, ss_aps;
};

SeedOutcome run_synth_world(std::uint64_t seed) {
    cli::SynthParams params;
    params.instance_count = 11000;
    params.option_count = 4;
    params.concentration = 1.0;
    params.seed = seed;
    auto world = cli::make_synth_world(params);

    auto script = std::make_shared<const providers::MockScript>(std::move(world.script));
    auto providers = providers::make_mock_providers(script);
    strategies::PromptLibrary prompts;
    auto split = core::split(world.dataset, 1.0 / 11.0, seed);  // 1000 / 10000

    eval::EvalInputs inputs;
    inputs.dataset = &world.dataset;
    inputs.split = &split;
    inputs.strategy = strategies::StrategyKind::NoRetrieve;
    inputs.protocol.kind = eval::ProtocolKind::Normal;
    inputs.providers = providers;
    inputs.prompts = &prompts;
    inputs.options.alpha = 0.1;
    inputs.options.seed = seed;
    inputs.options.concurrency = 8;
    inputs.options.dataset_name = "synth";

    auto report = eval::run_protocol(inputs);
    return {report.aggregates.cr_lac, report.aggregates.cr_aps, report.aggregates.ss_lac,
            report.aggregates.ss_aps};
}

void criteria_1_and_2() {
    auto start = std::chrono::steady_clock::now();
    Check cover, sizes;
    double min_cr = 1.0, max_cr = 0.0;
    // pinned seed set; per-seed coverage concentrates near 901/1001 with
    // sd ~ 0.01 (Beta(901,101) plus test sampling), so the +-0.02 band is a
    // ~2 sigma window per draw
    for (std::uint64_t seed = 101; seed <= 110; ++seed) {
        auto outcome = run_synth_world(seed);
        for (double cr : {outcome.cr_lac, outcome.cr_aps}) {
            min_cr = std::min(min_cr, cr);
            max_cr = std::max(max_cr, cr);
            if (cr < 0.88 || cr > 0.92) {
                cover.fail("seed " + std::to_string(seed) + " CR " + std::to_string(cr));
            }
        }
        if (outcome.ss_lac > outcome.ss_aps + 0.05) {
            sizes.fail("seed " + std::to_string(seed) + " LAC " +
                       std::to_string(outcome.ss_lac) + " vs APS " +
                       std::to_string(outcome.ss_aps));
        }
    }
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    if (elapsed >= 30000) cover.fail("runtime " + std::to_string(elapsed) + " ms >= 30 s");
    char buf[160];
    std::snprintf(buf, sizeof(buf), "10 seeds, CR range [%.4f, %.4f], %lld ms", min_cr, max_cr,
                  static_cast<long long>(elapsed));
    report(1, "conformal-coverage", cover.ok,
           cover.ok ? buf : cover.detail.str() + " (" + buf + ")");
    report(2, "lac-vs-aps-set-size", sizes.ok, sizes.ok ? "LAC <= APS + 0.05 on 10/10 seeds"
                                                        : sizes.detail.str());
}

// ---------------------------------------------------------------------------
// 3: calibrate against a brute-force sort oracle

void criterion_3() {
    Check check;
    core::Rng rng(333);
    std::size_t cases = 0;
    for (std::size_t n = 1; n <= 200 && check.ok; ++n) {
        for (int rep = 0; rep < 50; ++rep) {
            double alpha = 0.02 + 0.6 * core::uniform01(rng);
            std::vector<conformal::ScoredInstance> scored;
            std::vector<double> scores;
            for (std::size_t i = 0; i < n; ++i) {
                double p = core::uniform01(rng);
                scored.push_back(
                    {"s", core::OptionDistribution({p, 1.0 - p}), 0});
                scores.push_back(1.0 - p);
            }
            auto model = conformal::calibrate(scored, core::ScoreMethod::LAC, alpha);

            std::sort(scores.begin(), scores.end());
            long double raw =
                static_cast<long double>(n + 1) * (1.0L - static_cast<long double>(alpha));
            auto rank = static_cast<std::size_t>(std::ceil(raw - 1e-12L));
            bool infinite = rank > n;
            if (model.infinite() != infinite) {
                check.fail("overflow mismatch at n=" + std::to_string(n));
                break;
            }
            if (!infinite && model.q_hat != scores[rank - 1]) {
                check.fail("quantile mismatch at n=" + std::to_string(n));
                break;
            }
            ++cases;
        }
    }
    report(3, "quantile-oracle", check.ok,
           check.ok ? std::to_string(cases) + " cases incl. overflow rule" : check.detail.str());
}

// ---------------------------------------------------------------------------
// 4: RRF against the brute-force formula, order invariance, monotonicity

void criterion_4() {
    Check check;
    core::Rng rng(444);
    // brute-force evaluation of the fused-score formula; terms are summed in
    // ascending order, the convention the production path also pins
    auto oracle = [](const std::vector<retrieval::Ranking>& rankings, std::size_t k) {
        std::map<std::string, std::vector<double>> terms;
        for (const auto& r : rankings) {
            for (std::size_t rank = 0; rank < r.doc_ids.size(); ++rank) {
                terms[r.doc_ids[rank]].push_back(1.0 / static_cast<double>(k + rank + 1));
            }
        }
        std::map<std::string, double> scores;
        for (auto& [id, t] : terms) {
            std::sort(t.begin(), t.end());
            double sum = 0.0;
            for (double v : t) sum += v;
            scores[id] = sum;
        }
        return scores;
    };
    auto random_rankings = [&](std::size_t max_rankings) {
        std::vector<retrieval::Ranking> rankings;
        std::size_t count = 1 + core::bounded(rng, max_rankings);
        for (std::size_t r = 0; r < count; ++r) {
            std::vector<std::size_t> pool(24);
            for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
            core::shuffle_inplace(pool, rng);
            retrieval::Ranking ranking;
            std::size_t len = 1 + core::bounded(rng, 14);
            for (std::size_t i = 0; i < len; ++i)
                ranking.doc_ids.push_back("d" + std::to_string(pool[i]));
            rankings.push_back(std::move(ranking));
        }
        return rankings;
    };

    for (int trial = 0; trial < 1000 && check.ok; ++trial) {
        std::size_t k = core::bounded(rng, 100);
        auto rankings = random_rankings(5);
        auto fused = retrieval::rrf_fuse(rankings, k);
        auto scores = oracle(rankings, k);
        if (fused.doc_ids.size() != scores.size()) {
            check.fail("cardinality mismatch");
            break;
        }
        // expected order: descending score, ties by doc id
        std::vector<std::pair<std::string, double>> expected(scores.begin(), scores.end());
        std::stable_sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        for (std::size_t i = 0; i < fused.doc_ids.size(); ++i) {
            if (fused.doc_ids[i] != expected[i].first) {
                check.fail("order mismatch at position " + std::to_string(i));
                break;
            }
        }
        // order invariance
        auto reversed = rankings;
        std::reverse(reversed.begin(), reversed.end());
        if (retrieval::rrf_fuse(reversed, k).doc_ids != fused.doc_ids)
            check.fail("order invariance violated");
        // monotonicity: promote one doc one slot in one ranking
        if (rankings[0].doc_ids.size() >= 2) {
            auto& ids = rankings[0].doc_ids;
            std::size_t pos = 1 + core::bounded(rng, ids.size() - 1);
            std::string target = ids[pos];
            double before = oracle(rankings, k).at(target);
            std::swap(ids[pos], ids[pos - 1]);
            double after = oracle(rankings, k).at(target);
            if (after < before) check.fail("monotonicity violated");
        }
    }
    report(4, "rrf-oracle", check.ok,
           check.ok ? "1000 random inputs, order-invariant, monotone" : check.detail.str());
}

// ---------------------------------------------------------------------------
// 5: REPLUG mixture against a long-double oracle plus convex bounds

void criterion_5() {
    Check check;
    core::Rng rng(555);
    for (int trial = 0; trial < 1000 && check.ok; ++trial) {
        std::size_t docs = 1 + core::bounded(rng, 8);
        std::size_t k = 2 + core::bounded(rng, 5);
        std::vector<double> sims(docs);
        std::vector<core::OptionDistribution> dists;
        for (std::size_t d = 0; d < docs; ++d) {
            sims[d] = 2.0 * core::uniform01(rng) - 1.0;
            dists.emplace_back(core::dirichlet_sample(rng, k, 0.7));
        }
        auto out = strategies::replug_mixture(sims, dists);

        // oracle in extended precision
        long double z = 0.0L;
        std::vector<long double> lambda(docs);
        for (std::size_t d = 0; d < docs; ++d) {
            lambda[d] = std::exp(static_cast<long double>(sims[d]));
            z += lambda[d];
        }
        for (auto& l : lambda) l /= z;
        for (std::size_t c = 0; c < k; ++c) {
            long double expected = 0.0L;
            long double lo = 1.0L, hi = 0.0L;
            for (std::size_t d = 0; d < docs; ++d) {
                expected += lambda[d] * static_cast<long double>(dists[d][c]);
                lo = std::min(lo, static_cast<long double>(dists[d][c]));
                hi = std::max(hi, static_cast<long double>(dists[d][c]));
            }
            if (std::abs(static_cast<double>(expected) - out[c]) > 1e-9)
                check.fail("mixture drift " + std::to_string(out[c]));
            if (out[c] < static_cast<double>(lo) - 1e-12 ||
                out[c] > static_cast<double>(hi) + 1e-12)
                check.fail("convex bound violated");
        }
    }
    report(5, "replug-mixture", check.ok,
           check.ok ? "1000 draws within 1e-9, convex bounds hold" : check.detail.str());
}

// ---------------------------------------------------------------------------
// 6: BIC model selection on separated clusters plus the spot value

void criterion_6() {
    Check check;
    double spot = strategies::bic(100, 10, -50.0);
    if (std::abs(spot - 146.052) > 1e-3)
        check.fail("BIC spot value " + std::to_string(spot));

    int hits = 0;
    for (int trial = 0; trial < 100; ++trial) {
        core::Rng rng(7000 + trial);
        Eigen::MatrixXd X(60, 2);
        const double sigma = 0.01;
        const std::vector<std::pair<double, double>> centers{{0.0, 0.0}, {0.2, 0.0}, {0.0, 0.2}};
        Eigen::Index row = 0;
        for (const auto& [cx, cy] : centers) {
            for (int i = 0; i < 20; ++i) {
                X(row, 0) = cx + core::normal_sample(rng, 0.0, sigma);
                X(row, 1) = cy + core::normal_sample(rng, 0.0, sigma);
                ++row;
            }
        }
        auto selection = strategies::select_components_bic(X, 6, rng);
        if (selection.k == 3) ++hits;
    }
    if (hits < 95) check.fail("K=3 recovered in only " + std::to_string(hits) + "/100 trials");
    char buf[80];
    std::snprintf(buf, sizeof(buf), "K=3 in %d/100 trials, BIC(100,10,-50)=%.4f", hits, spot);
    report(6, "raptor-bic-selection", check.ok, check.ok ? buf : check.detail.str());
}

// ---------------------------------------------------------------------------
// 7: restricted softmax vs extended-precision oracle and shift invariance

void criterion_7() {
    Check check;
    core::Rng rng(777);
    for (int trial = 0; trial < 1000 && check.ok; ++trial) {
        std::size_t k = 2 + core::bounded(rng, 7);
        std::vector<double> logits(k);
        for (auto& l : logits) l = 12.0 * core::uniform01(rng) - 6.0;
        auto d = providers::restricted_softmax(logits);

        long double z = 0.0L;
        long double max_logit = logits[0];
        for (double l : logits) max_logit = std::max<long double>(max_logit, l);
        for (double l : logits) z += std::exp(static_cast<long double>(l) - max_logit);
        for (std::size_t c = 0; c < k; ++c) {
            long double expected =
                std::exp(static_cast<long double>(logits[c]) - max_logit) / z;
            if (std::abs(static_cast<double>(expected) - d[c]) > 1e-9)
                check.fail("softmax drift");
        }

        double shift = 40.0 * core::uniform01(rng) - 20.0;
        std::vector<double> shifted = logits;
        for (auto& l : shifted) l += shift;
        auto ds = providers::restricted_softmax(shifted);
        for (std::size_t c = 0; c < k; ++c) {
            if (std::abs(d[c] - ds[c]) > 1e-9) check.fail("shift invariance violated");
        }
    }
    report(7, "answer-scoring-oracle", check.ok,
           check.ok ? "1000 logit vectors within 1e-9, shift-invariant" : check.detail.str());
}

// ---------------------------------------------------------------------------
// fixture world shared by criteria 8-12

struct FixtureWorld {
    std::vector<core::McqaInstance> dataset;
    std::vector<core::Document> corpus;
    std::shared_ptr<const providers::MockScript> script;
    providers::Providers providers;
    strategies::PromptLibrary prompts;
    retrieval::VectorIndex index;
    strategies::RaptorTree tree;
    core::SplitSpec split;

    explicit FixtureWorld(std::size_t corpus_docs = 12) {
        dataset = core::load_dataset(fixture("dataset.jsonl"));
        corpus = core::load_corpus(fixture("corpus.jsonl"));
        if (corpus.size() > corpus_docs) corpus.resize(corpus_docs);
        script = std::make_shared<const providers::MockScript>(
            providers::MockScript::load(fixture("mock.json")));
        providers = providers::make_mock_providers(script);
        prompts = strategies::PromptLibrary::defaults();
        index = retrieval::build_index(corpus, *providers.embedder, "fixture");
        strategies::StrategyConfig config;
        config.seed = 17;
        tree = strategies::build_raptor_tree(corpus, config, *providers.embedder,
                                             *providers.chat, prompts, "fixture");
        split = core::split(dataset, 0.5, 17);
    }

    eval::EvalInputs inputs(strategies::StrategyKind strategy, eval::ProtocolKind kind) const {
        eval::EvalInputs in;
        in.dataset = &dataset;
        in.split = &split;
        in.strategy = strategy;
        in.config.retrieval_depth = 4;
        in.config.seed = 17;
        in.protocol.kind = kind;
        in.protocol.injected_count = 3;
        in.providers = providers;
        in.index = &index;
        in.tree = &tree;
        in.corpus = &corpus;
        in.prompts = &prompts;
        in.options.alpha = 0.1;
        in.options.seed = 17;
        in.options.concurrency = 4;
        in.options.dataset_name = "fixture";
        return in;
    }
};

// 8: byte-reproducibility of every strategy x protocol over the fixtures

void criterion_8() {
    Check check;
    const std::vector<strategies::StrategyKind> kinds{
        strategies::StrategyKind::NoRetrieve, strategies::StrategyKind::Naive,
        strategies::StrategyKind::Fusion,     strategies::StrategyKind::Hyde,
        strategies::StrategyKind::Raptor,     strategies::StrategyKind::Replug,
        strategies::StrategyKind::SelfRag,    strategies::StrategyKind::Rat};
    const std::vector<eval::ProtocolKind> protocols{
        eval::ProtocolKind::Normal, eval::ProtocolKind::SelfAware, eval::ProtocolKind::WrongAware,
        eval::ProtocolKind::IrrelevantContext, eval::ProtocolKind::KnowledgeIsolation};

    std::size_t combos = 0;
    for (auto kind : kinds) {
        for (auto protocol : protocols) {
            // full pipeline twice, including a fresh fixture world each time
            auto run_once = [&]() {
                FixtureWorld world;
                return eval::report_to_json(eval::run_protocol(world.inputs(kind, protocol)))
                    .dump();
            };
            std::string a = run_once();
            std::string b = run_once();
            if (a != b) {
                check.fail(std::string(strategies::strategy_name(kind)) + "/" +
                           eval::protocol_name(protocol) + " not reproducible");
            }
            ++combos;
        }
        if (!check.ok) break;
    }
    report(8, "protocol-determinism", check.ok,
           check.ok ? std::to_string(combos) + " strategy x protocol runs byte-identical"
                    : check.detail.str());
}

// 9: wrong-aware display permutation with untouched evaluation distribution

void criterion_9() {
    Check check;
    FixtureWorld world;
    auto normal = eval::run_protocol(
        world.inputs(strategies::StrategyKind::Naive, eval::ProtocolKind::Normal));
    auto wrong = eval::run_protocol(
        world.inputs(strategies::StrategyKind::Naive, eval::ProtocolKind::WrongAware));

    if (wrong.records.size() != normal.records.size()) check.fail("record count mismatch");
    for (std::size_t i = 0; i < wrong.records.size() && check.ok; ++i) {
        const auto& r = wrong.records[i];
        if (!r.prior_distribution) {
            check.fail(r.instance_id + ": no prior distribution");
            break;
        }
        // hash check: stored prior equals the normal-run distribution
        auto stored = nlohmann::json(r.prior_distribution->probs).dump();
        auto baseline = nlohmann::json(normal.records[i].distribution.probs).dump();
        if (core::fnv1a(stored) != core::fnv1a(baseline))
            check.fail(r.instance_id + ": stored distribution was mutated");

        auto display = eval::apply_wrong_aware(*r.prior_distribution);
        auto hi = core::stable_argmax(r.prior_distribution->probs);
        std::size_t lo = 0;
        for (std::size_t c = 0; c < r.prior_distribution->size(); ++c) {
            if (r.prior_distribution->probs[c] <= r.prior_distribution->probs[lo]) lo = c;
        }
        if (display[hi] != r.prior_distribution->probs[lo] ||
            display[lo] != r.prior_distribution->probs[hi])
            check.fail(r.instance_id + ": display is not the max-min permutation");

        const auto& prompt = r.trace.steps.back().prompt;
        char line[16];
        for (std::size_t c = 0; c < display.size(); ++c) {
            std::snprintf(line, sizeof(line), "%c. %.2f", static_cast<char>('A' + c),
                          display[c]);
            if (!core::contains(prompt, line))
                check.fail(r.instance_id + ": block line missing: " + line);
        }
    }
    report(9, "wrong-aware-integrity", check.ok,
           check.ok ? "display permuted, stored distributions untouched on all fixtures"
                    : check.detail.str());
}

// 10: knowledge isolation partition and aggregate recombination

void criterion_10() {
    Check check;
    FixtureWorld world;
    auto report_ki = eval::run_protocol(
        world.inputs(strategies::StrategyKind::Naive, eval::ProtocolKind::KnowledgeIsolation));

    std::size_t subset_total = 0;
    double acc_sum = 0.0, ss_sum = 0.0, cr_lac_sum = 0.0;
    for (const auto& [name, agg] : report_ki.subset_aggregates) {
        subset_total += agg.count;
        acc_sum += agg.acc * static_cast<double>(agg.count);
        ss_sum += agg.ss_headline * static_cast<double>(agg.count);
        cr_lac_sum += agg.cr_lac * static_cast<double>(agg.count);
    }
    if (subset_total != report_ki.aggregates.count) check.fail("subsets do not partition");
    auto total = static_cast<double>(report_ki.aggregates.count);
    if (std::abs(acc_sum / total - report_ki.aggregates.acc) > 1e-9)
        check.fail("acc recombination drift");
    if (std::abs(ss_sum / total - report_ki.aggregates.ss_headline) > 1e-9)
        check.fail("ss recombination drift");
    if (std::abs(cr_lac_sum / total - report_ki.aggregates.cr_lac) > 1e-9)
        check.fail("cr recombination drift");

    // per-record subset tags partition the test records exactly
    std::size_t tagged = 0;
    for (const auto& r : report_ki.records) {
        if (r.in_calibration || !r.usable()) continue;
        int tags = 0;
        for (const auto& n : r.notes) {
            if (n == "ki_subset:llm_correct" || n == "ki_subset:llm_incorrect") ++tags;
        }
        if (tags != 1) check.fail(r.instance_id + ": subset tag count " + std::to_string(tags));
        ++tagged;
    }
    if (tagged == 0) check.fail("no test records tagged");
    report(10, "knowledge-isolation", check.ok,
           check.ok ? "subsets partition; weighted recombination within 1e-9"
                    : check.detail.str());
}

// 11: forge trend under a per-iteration improving mock

void criterion_11() {
    Check check;
    auto script = std::make_shared<providers::MockScript>();
    auto add_rule = [&](const std::string& contains, const std::string& text) {
        providers::MockChatRule rule;
        rule.contains = contains;
        rule.text = text;
        script->chat_rules.push_back(rule);
    };
    // iteration 0 (naive prompt) emits a weak distractor; each regeneration
    // cites the prior one and improves; the third-round text clears the gate
    add_rule("Previously, you generated \"Round two pick",
             R"({"fake_answer": "Round three pick", "similarity_type": "topic-similar",)"
             R"( "fake_document_title": "T", "fake_document_excerpt": "E"})");
    add_rule("Previously, you generated \"Round one pick",
             R"({"fake_answer": "Round two pick", "similarity_type": "topic-similar",)"
             R"( "fake_document_title": "T", "fake_document_excerpt": "E"})");
    add_rule("Previously, you generated",
             R"({"fake_answer": "Round one pick", "similarity_type": "topic-similar",)"
             R"( "fake_document_title": "T", "fake_document_excerpt": "E"})");
    add_rule("You will generate a fake answer", R"({"fake_answer": "Round zero pick"})");
    script->nli_rules.push_back({"Round three pick", 0.9, 0.05, 0.05});
    script->nli_rules.push_back({"instant pick", 0.95, 0.03, 0.02});
    script->nli_default = {"", 0.1, 0.8, 0.1};
    auto providers = providers::make_mock_providers(
        std::make_shared<const providers::MockScript>(*script));
    strategies::PromptLibrary prompts;

    forge::ForgeConfig config;
    config.distractor_count = 1;
    config.max_iterations = 3;
    config.initial_mode = forge::ForgeMode::Naive;
    config.seed = 99;

    std::vector<forge::ForgeVerdict> verdicts;
    std::vector<core::McqaInstance> instances;
    for (int i = 0; i < 6; ++i) {
        auto forged = forge::forge_instance(*providers.chat, *providers.nli, prompts,
                                            "t" + std::to_string(i),
                                            "Trend question " + std::to_string(i) + "?",
                                            "Gold answer " + std::to_string(i), "ctx", "forged",
                                            config);
        verdicts.push_back(forged.verdict);
        instances.push_back(forged.instance);
    }
    auto table = forge::forge_report(verdicts, config.max_iterations);

    for (std::size_t i = 1; i < table.difficult_percent_by_iteration.size(); ++i) {
        if (table.difficult_percent_by_iteration[i] <
            table.difficult_percent_by_iteration[i - 1])
            check.fail("difficult%% decreased at iteration " + std::to_string(i));
    }
    // the scripted world clears the gate at the third regeneration
    if (table.difficult_percent_by_iteration[3] != 100.0)
        check.fail("did not reach 100%% by the scripted iteration");
    if (table.difficult_percent_by_iteration[0] != 0.0)
        check.fail("naive round unexpectedly difficult");
    for (const auto& inst : instances) {
        try {
            inst.validate();
            if (inst.options.size() != 2) check.fail("wrong option count");
        } catch (const std::exception& e) {
            check.fail(std::string("invariant: ") + e.what());
        }
    }
    std::ostringstream row;
    row << "trend";
    for (double p : table.difficult_percent_by_iteration) row << ' ' << p << '%';
    report(11, "forge-trend", check.ok, check.ok ? row.str() : check.detail.str());
}

// 12: depth sweep with clamped and oversized corpora

void criterion_12() {
    Check check;
    // (a) corpus smaller than the smallest k: identical metrics
    {
        FixtureWorld world(8);  // 8 docs < k = 10
        auto inputs = world.inputs(strategies::StrategyKind::Naive,
                                   eval::ProtocolKind::DepthSweep);
        inputs.protocol.k_list = {10, 50, 100, 500};
        auto reports = eval::depth_sweep(inputs);
        if (reports.size() != 4) check.fail("expected 4 reports");
        for (std::size_t i = 0; i < reports.size(); ++i) {
            if (reports[i].metadata.at("k") != std::to_string(inputs.protocol.k_list[i]))
                check.fail("metadata k missing");
            if (!reports[i].metadata.count("run_error")) {
                if (reports[i].aggregates.acc != reports[0].aggregates.acc ||
                    reports[i].aggregates.ss_headline != reports[0].aggregates.ss_headline ||
                    reports[i].aggregates.cr_lac != reports[0].aggregates.cr_lac)
                    check.fail("clamped metrics differ at k=" + reports[i].metadata.at("k"));
            } else {
                check.fail("run failed: " + reports[i].metadata.at("run_error"));
            }
        }
    }
    // (b) corpus larger than 500: retrieved-id sets differ across k
    {
        std::vector<core::Document> big;
        for (int i = 0; i < 520; ++i) {
            core::Document d;
            char id[16];
            std::snprintf(id, sizeof(id), "big%04d", i);
            d.id = id;
            d.body = "Bulk passage " + std::to_string(i) + " about theme " +
                     std::to_string(i % 13) + ".";
            big.push_back(std::move(d));
        }
        auto dataset = core::load_dataset(fixture("dataset.jsonl"));
        auto script = std::make_shared<const providers::MockScript>(
            providers::MockScript::load(fixture("mock.json")));
        auto providers = providers::make_mock_providers(script);
        strategies::PromptLibrary prompts;
        auto index = retrieval::build_index(big, *providers.embedder, "big");
        auto split = core::split(dataset, 0.5, 17);

        eval::EvalInputs inputs;
        inputs.dataset = &dataset;
        inputs.split = &split;
        inputs.strategy = strategies::StrategyKind::Naive;
        inputs.protocol.kind = eval::ProtocolKind::DepthSweep;
        inputs.protocol.k_list = {10, 50, 100, 500};
        inputs.providers = providers;
        inputs.index = &index;
        inputs.corpus = &big;
        inputs.prompts = &prompts;
        inputs.options.alpha = 0.1;
        inputs.options.seed = 17;
        inputs.options.dataset_name = "fixture";

        auto reports = eval::depth_sweep(inputs);
        if (reports.size() != 4) check.fail("expected 4 reports over the big corpus");
        std::set<std::size_t> retrieved_sizes;
        for (const auto& r : reports) {
            if (r.records.empty()) {
                check.fail("big-corpus run failed at k=" + r.metadata.at("k"));
                continue;
            }
            retrieved_sizes.insert(r.records.front().trace.steps[0].retrieved_ids.size());
        }
        if (retrieved_sizes != std::set<std::size_t>{10, 50, 100, 500})
            check.fail("retrieved-id set sizes do not track k");
    }
    report(12, "depth-sweep-harness", check.ok,
           check.ok ? "clamped metrics identical; retrieved sets track k over 520 docs"
                    : check.detail.str());
}

}  // namespace

int main() {
    std::printf("uragc acceptance suite\n");
    criteria_1_and_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    std::printf("%s: %d criterion(s) failed\n", g_failures == 0 ? "OK" : "NOT OK", g_failures);
    return g_failures;
}
