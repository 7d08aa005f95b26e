#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "urag/core/dataset.hpp"
#include "urag/core/rng.hpp"
#include "urag/eval/protocol.hpp"
#include "urag/providers/mock.hpp"
#include "urag/retrieval/index.hpp"

using namespace urag;
using namespace urag::eval;
using providers::MockChatRule;
using providers::MockScript;

namespace {

std::string fixture(const char* name) {
    return std::string(URAG_FIXTURE_DIR) + "/" + name;
}

InstanceRecord record_with_set(const std::string& id, std::size_t gold,
                               std::vector<double> probs, std::vector<std::size_t> lac_members,
                               std::vector<std::size_t> aps_members) {
    InstanceRecord r;
    r.instance_id = id;
    r.gold_index = gold;
    r.distribution = core::OptionDistribution(std::move(probs));
    r.top1 = core::stable_argmax(r.distribution.probs);
    r.top1_correct = r.top1 == gold;
    core::PredictionSet lac{core::ScoreMethod::LAC, 0.5, std::move(lac_members)};
    core::PredictionSet aps{core::ScoreMethod::APS, 0.5, std::move(aps_members)};
    r.set_lac = lac;
    r.set_aps = aps;
    return r;
}

struct FixtureHarness {
    std::vector<core::McqaInstance> dataset = core::load_dataset(fixture("dataset.jsonl"));
    std::vector<core::Document> corpus = core::load_corpus(fixture("corpus.jsonl"));
    std::shared_ptr<MockScript> script =
        std::make_shared<MockScript>(MockScript::load(fixture("mock.json")));
    providers::Providers providers = providers::make_mock_providers(script);
    strategies::PromptLibrary prompts = strategies::PromptLibrary::defaults();
    retrieval::VectorIndex index =
        retrieval::build_index(corpus, *providers.embedder, "fixture");
    core::SplitSpec split = core::split(dataset, 0.5, 21);

    EvalInputs inputs(strategies::StrategyKind strategy, ProtocolKind kind) {
        EvalInputs in;
        in.dataset = &dataset;
        in.split = &split;
        in.strategy = strategy;
        in.config.retrieval_depth = 4;
        in.config.seed = 5;
        in.protocol.kind = kind;
        in.protocol.injected_count = 3;
        in.providers = providers;
        in.index = &index;
        in.corpus = &corpus;
        in.prompts = &prompts;
        in.options.alpha = 0.1;
        in.options.seed = 5;
        in.options.concurrency = 4;
        in.options.dataset_name = "fixture";
        return in;
    }
};

}  // namespace

TEST_CASE("aggregate worked examples") {
    SUBCASE("cr is the mean of gold-in-set") {
        std::vector<InstanceRecord> records{
            record_with_set("a", 0, {0.7, 0.2, 0.1}, {0}, {0}),      // gold in set
            record_with_set("b", 1, {0.6, 0.3, 0.1}, {0}, {0, 2})};  // gold not in set
        auto agg = aggregate(records, core::ScoreMethod::LAC);
        CHECK(agg.cr == doctest::Approx(0.5));
    }
    SUBCASE("ss is the mean set cardinality") {
        std::vector<InstanceRecord> records{
            record_with_set("a", 0, {0.7, 0.2, 0.1}, {0}, {0}),
            record_with_set("b", 1, {0.6, 0.3, 0.1}, {0, 1, 2}, {0})};
        auto agg = aggregate(records, core::ScoreMethod::LAC);
        CHECK(agg.ss == doctest::Approx(2.0));
    }
    SUBCASE("acc hits 1 when every top1 matches gold") {
        std::vector<InstanceRecord> records{
            record_with_set("a", 0, {0.7, 0.2, 0.1}, {0}, {0}),
            record_with_set("b", 0, {0.9, 0.05, 0.05}, {0}, {0})};
        auto agg = aggregate(records, core::ScoreMethod::APS);
        CHECK(agg.acc == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(aggregate({}, core::ScoreMethod::LAC), ArgumentError);
}

TEST_CASE("aggregate is invariant to record order") {
    core::Rng rng(3);
    std::vector<InstanceRecord> records;
    for (int i = 0; i < 20; ++i) {
        auto probs = core::dirichlet_sample(rng, 4, 1.0);
        std::vector<std::size_t> members;
        for (std::size_t c = 0; c < 4; ++c) {
            if (core::uniform01(rng) < 0.5) members.push_back(c);
        }
        records.push_back(record_with_set("r" + std::to_string(i), core::bounded(rng, 4), probs,
                                          members, members));
    }
    auto base = aggregate(records, core::ScoreMethod::LAC);
    auto shuffled = records;
    core::shuffle_inplace(shuffled, rng);
    auto again = aggregate(shuffled, core::ScoreMethod::LAC);
    CHECK(again.acc == doctest::Approx(base.acc).epsilon(1e-12));
    CHECK(again.cr == doctest::Approx(base.cr).epsilon(1e-12));
    CHECK(again.ss == doctest::Approx(base.ss).epsilon(1e-12));
}

TEST_CASE("apply_self_aware renders the block at the placeholder, exactly once") {
    core::OptionDistribution d({0.70, 0.20, 0.10});
    std::string prompt = "Answer the question.\n{confidence_block}\nDo not explain.";
    std::string out = apply_self_aware(prompt, d);
    CHECK(core::contains(out, "Knowing that your previous answer had the following confidence:"));
    CHECK(core::contains(out, "A. 0.70"));
    CHECK(core::contains(out, "B. 0.20"));
    CHECK(core::contains(out, "C. 0.10"));
    CHECK(out.find("{confidence_block}") == std::string::npos);
    // block appears exactly once
    auto first = out.find("Knowing that");
    CHECK(out.find("Knowing that", first + 1) == std::string::npos);

    CHECK_THROWS_AS(apply_self_aware("no placeholder here", d), ProtocolError);
}

TEST_CASE("apply_wrong_aware swaps first max with last min") {
    auto a = apply_wrong_aware(core::OptionDistribution({0.70, 0.20, 0.10}));
    CHECK(a.probs == std::vector<double>{0.10, 0.20, 0.70});

    auto uniform = apply_wrong_aware(core::OptionDistribution({0.25, 0.25, 0.25, 0.25}));
    CHECK(uniform.probs == std::vector<double>{0.25, 0.25, 0.25, 0.25});

    auto two = apply_wrong_aware(core::OptionDistribution({0.5, 0.5}));
    CHECK(two.probs == std::vector<double>{0.5, 0.5});  // indices 0 and 1 exchanged

    // ties: first max, last min
    auto tied = apply_wrong_aware(core::OptionDistribution({0.4, 0.4, 0.1, 0.1}));
    CHECK(tied.probs == std::vector<double>{0.1, 0.4, 0.1, 0.4});

    auto second = apply_wrong_aware(core::OptionDistribution({0.6, 0.3, 0.1}), true);
    CHECK(second.probs == std::vector<double>{0.3, 0.6, 0.1});
}

TEST_CASE("knowledge_isolation_split partitions by baseline correctness") {
    std::vector<core::McqaInstance> dataset;
    for (int i = 0; i < 5; ++i) {
        core::McqaInstance inst;
        inst.id = "k" + std::to_string(i);
        inst.question = "q";
        inst.options = {"a", "b"};
        inst.answer_index = 0;
        inst.corpus_ref = "c";
        dataset.push_back(inst);
    }
    RunReport baseline;
    for (int i = 0; i < 5; ++i) {
        bool correct = i < 3;
        auto r = record_with_set("k" + std::to_string(i), 0,
                                 correct ? std::vector<double>{0.9, 0.1}
                                         : std::vector<double>{0.1, 0.9},
                                 {0}, {0});
        baseline.records.push_back(r);
    }
    auto [correct, incorrect] = knowledge_isolation_split(dataset, baseline);
    CHECK(correct.size() == 3);
    CHECK(incorrect.size() == 2);

    // all correct leaves the incorrect list empty
    for (auto& r : baseline.records) {
        r.distribution = core::OptionDistribution({0.9, 0.1});
        r.top1 = 0;
        r.top1_correct = true;
    }
    auto [all_correct, none] = knowledge_isolation_split(dataset, baseline);
    CHECK(all_correct.size() == 5);
    CHECK(none.empty());

    // missing instance names the id
    baseline.records.pop_back();
    try {
        knowledge_isolation_split(dataset, baseline);
        FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
        CHECK(core::contains(e.what(), "k4"));
    }
}

TEST_CASE("run_protocol: degenerate certainty gives Acc=1, CR=1, SS=1") {
    // needs a calibration count large enough for a finite quantile at
    // alpha=0.1 (ceil((n+1)*0.9) <= n means n >= 9)
    std::vector<core::McqaInstance> dataset;
    auto script = std::make_shared<MockScript>();
    for (int i = 0; i < 24; ++i) {
        core::McqaInstance inst;
        char id[16];
        std::snprintf(id, sizeof(id), "c%03d", i);
        inst.id = id;
        inst.question = std::string("Certain item [qid:") + id + "] pick one.";
        inst.options = {"w", "x", "y", "z"};
        inst.answer_index = static_cast<std::size_t>(i % 4);
        inst.corpus_ref = "certain";
        MockChatRule rule;
        std::vector<double> probs(4, 0.1 / 3.0);
        probs[inst.answer_index] = 0.9;
        rule.probs = probs;
        script->keyed_chat[inst.id] = rule;
        dataset.push_back(std::move(inst));
    }
    auto split = core::split(dataset, 0.5, 3);
    strategies::PromptLibrary prompts;
    auto providers = providers::make_mock_providers(script);
    EvalInputs inputs;
    inputs.dataset = &dataset;
    inputs.split = &split;
    inputs.strategy = strategies::StrategyKind::NoRetrieve;
    inputs.protocol.kind = ProtocolKind::Normal;
    inputs.providers = providers;
    inputs.prompts = &prompts;
    inputs.options.alpha = 0.1;
    inputs.options.dataset_name = "certain";
    auto report = run_protocol(inputs);
    CHECK(report.aggregates.acc == doctest::Approx(1.0));
    CHECK(report.aggregates.cr_lac == doctest::Approx(1.0));
    CHECK(report.aggregates.cr_aps == doctest::Approx(1.0));
    CHECK(report.aggregates.ss_lac == doctest::Approx(1.0));
    CHECK(report.aggregates.ss_aps == doctest::Approx(1.0));
    CHECK(report.aggregates.ss_headline == doctest::Approx(1.0));
    CHECK(report.invariant_violations.empty());
}

TEST_CASE("run_protocol is byte-identical across runs under the mock") {
    FixtureHarness h;
    auto inputs = h.inputs(strategies::StrategyKind::Naive, ProtocolKind::Normal);
    auto a = run_protocol(inputs);
    auto b = run_protocol(inputs);
    CHECK(report_to_json(a).dump() == report_to_json(b).dump());
}

TEST_CASE("run_protocol validates the split") {
    FixtureHarness h;
    auto inputs = h.inputs(strategies::StrategyKind::NoRetrieve, ProtocolKind::Normal);
    core::SplitSpec broken = h.split;
    broken.test_ids.pop_back();
    inputs.split = &broken;
    CHECK_THROWS_AS(run_protocol(inputs), ArgumentError);

    core::SplitSpec empty_cal = h.split;
    empty_cal.test_ids.insert(empty_cal.test_ids.end(), empty_cal.calibration_ids.begin(),
                              empty_cal.calibration_ids.end());
    empty_cal.calibration_ids.clear();
    inputs.split = &empty_cal;
    CHECK_THROWS_AS(run_protocol(inputs), ArgumentError);
}

TEST_CASE("flagged records are excluded from aggregates and counted in the manifest") {
    FixtureHarness h;
    // degrade one specific test instance: only label A in top-n
    // (the floor rule flags the record)
    core::SplitSpec split = h.split;
    const std::string victim = split.test_ids.front();
    std::string victim_question;
    for (const auto& inst : h.dataset) {
        if (inst.id == victim) victim_question = inst.question;
    }
    MockChatRule rigged;
    rigged.contains = victim_question;
    rigged.label_logprobs = {{"A", -0.1}};
    h.script->chat_rules.insert(h.script->chat_rules.begin(), rigged);

    auto inputs = h.inputs(strategies::StrategyKind::NoRetrieve, ProtocolKind::Normal);
    auto report = run_protocol(inputs);
    CHECK(report.manifest.flagged_excluded == 1);
    CHECK(report.manifest.flag_counts.at("floor_rule") == 1);
    CHECK(report.aggregates.count == split.test_ids.size() - 1);
}

TEST_CASE("self-aware protocol inserts the prior confidence block exactly once") {
    FixtureHarness h;
    auto normal = run_protocol(h.inputs(strategies::StrategyKind::Naive, ProtocolKind::Normal));
    auto aware = run_protocol(h.inputs(strategies::StrategyKind::Naive, ProtocolKind::SelfAware));

    REQUIRE(aware.records.size() == normal.records.size());
    for (std::size_t i = 0; i < aware.records.size(); ++i) {
        const auto& r = aware.records[i];
        REQUIRE(r.usable());
        REQUIRE(r.prior_trace.has_value());
        REQUIRE(r.prior_distribution.has_value());
        // fresh prior pass reproduces the normal run
        CHECK(r.prior_distribution->probs == normal.records[i].distribution.probs);
        // the scoring prompt carries the block once
        const auto& prompt = r.trace.steps.back().prompt;
        auto first = prompt.find("Knowing that your previous answer");
        REQUIRE(first != std::string::npos);
        CHECK(prompt.find("Knowing that your previous answer", first + 1) == std::string::npos);
        // block lists the prior values in option order at 2 decimals
        char head[16];
        std::snprintf(head, sizeof(head), "A. %.2f", (*r.prior_distribution)[0]);
        CHECK(core::contains(prompt, head));
    }
    // normal runs never carry the block
    for (const auto& r : normal.records) {
        CHECK(!core::contains(r.trace.steps.back().prompt, "Knowing that"));
    }
}

TEST_CASE("wrong-aware: displayed block is permuted, stored distribution untouched") {
    FixtureHarness h;
    auto normal = run_protocol(h.inputs(strategies::StrategyKind::Naive, ProtocolKind::Normal));
    auto wrong = run_protocol(h.inputs(strategies::StrategyKind::Naive, ProtocolKind::WrongAware));

    REQUIRE(wrong.records.size() == normal.records.size());
    for (std::size_t i = 0; i < wrong.records.size(); ++i) {
        const auto& r = wrong.records[i];
        REQUIRE(r.prior_distribution.has_value());
        // hash check: the stored prior distribution is the unpermuted one
        CHECK(core::fnv1a(nlohmann::json(r.prior_distribution->probs).dump()) ==
              core::fnv1a(nlohmann::json(normal.records[i].distribution.probs).dump()));
        auto display = apply_wrong_aware(*r.prior_distribution);
        const auto& prompt = r.trace.steps.back().prompt;
        char line[16];
        std::snprintf(line, sizeof(line), "A. %.2f", display[0]);
        CHECK(core::contains(prompt, line));
    }
    bool watermarked = false;
    for (const auto& w : wrong.watermarks) {
        watermarked |= w == "wrong_aware_swap=highest_lowest";
    }
    CHECK(watermarked);
}

TEST_CASE("aware protocols skip instances whose prior pass failed, with a reason") {
    FixtureHarness h;
    // a provider that fails on one instance's question
    class PoisonedChat : public providers::ChatProvider {
    public:
        PoisonedChat(std::shared_ptr<providers::ChatProvider> inner, std::string marker)
            : inner_(std::move(inner)), marker_(std::move(marker)) {}
        providers::ChatResult chat(const providers::ChatRequest& request) override {
            if (core::contains(request.flattened(), marker_))
                throw ProviderError("poisoned instance", 500, false);
            return inner_->chat(request);
        }
        std::string identity() const override { return "poisoned(" + inner_->identity() + ")"; }

    private:
        std::shared_ptr<providers::ChatProvider> inner_;
        std::string marker_;
    };
    auto inputs = h.inputs(strategies::StrategyKind::NoRetrieve, ProtocolKind::SelfAware);
    // poison a test instance; calibration must stay usable
    std::string victim = h.split.test_ids.front();
    std::string victim_question;
    for (const auto& inst : h.dataset) {
        if (inst.id == victim) victim_question = inst.question;
    }
    inputs.providers.chat = std::make_shared<PoisonedChat>(h.providers.chat, victim_question);

    auto report = run_protocol(inputs);
    bool found = false;
    for (const auto& r : report.records) {
        if (r.instance_id != victim) continue;
        found = true;
        CHECK(!r.usable());
        CHECK(core::contains(r.failure, "prior pass missing"));
    }
    CHECK(found);
    CHECK(report.manifest.failed == 1);
}

TEST_CASE("knowledge isolation: subsets partition and recombine to the full aggregate") {
    FixtureHarness h;
    auto report =
        run_protocol(h.inputs(strategies::StrategyKind::Naive, ProtocolKind::KnowledgeIsolation));

    std::size_t n_correct = 0, n_incorrect = 0;
    double acc_sum = 0.0, ss_sum = 0.0;
    for (const auto& [name, agg] : report.subset_aggregates) {
        if (name == "llm_correct") n_correct = agg.count;
        if (name == "llm_incorrect") n_incorrect = agg.count;
        acc_sum += agg.acc * static_cast<double>(agg.count);
        ss_sum += agg.ss_headline * static_cast<double>(agg.count);
    }
    CHECK(n_correct + n_incorrect == report.aggregates.count);
    auto total = static_cast<double>(report.aggregates.count);
    CHECK(std::abs(acc_sum / total - report.aggregates.acc) < 1e-9);
    CHECK(std::abs(ss_sum / total - report.aggregates.ss_headline) < 1e-9);

    // every test record is tagged with its subset
    for (const auto& r : report.records) {
        if (r.in_calibration || !r.usable()) continue;
        bool tagged = false;
        for (const auto& n : r.notes) tagged |= n.rfind("ki_subset:", 0) == 0;
        CHECK(tagged);
    }
}

TEST_CASE("depth sweep: clamped corpus gives identical metrics across k") {
    FixtureHarness h;  // corpus has 12 docs; k >= 12 clamps
    auto inputs = h.inputs(strategies::StrategyKind::Naive, ProtocolKind::DepthSweep);
    inputs.protocol.k_list = {12, 50, 100, 500};
    auto reports = depth_sweep(inputs);
    REQUIRE(reports.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(reports[i].metadata.at("k") ==
              std::to_string(inputs.protocol.k_list[i]));
        CHECK(reports[i].protocol == "depth_sweep");
    }
    for (std::size_t i = 1; i < 4; ++i) {
        CHECK(reports[i].aggregates.acc == doctest::Approx(reports[0].aggregates.acc));
        CHECK(reports[i].aggregates.ss_headline ==
              doctest::Approx(reports[0].aggregates.ss_headline));
        CHECK(reports[i].aggregates.cr_lac == doctest::Approx(reports[0].aggregates.cr_lac));
    }
}

TEST_CASE("depth sweep validates the k list") {
    ProtocolSpec spec;
    spec.kind = ProtocolKind::DepthSweep;
    spec.k_list = {};
    CHECK_THROWS_AS(spec.validate(), UsageError);
    spec.k_list = {10, 10};
    CHECK_THROWS_AS(spec.validate(), UsageError);
    spec.k_list = {10, 50, 100, 500};
    CHECK_NOTHROW(spec.validate());
}

TEST_CASE("irrelevant-context protocol injects per retrieval and records it") {
    FixtureHarness h;
    auto inputs = h.inputs(strategies::StrategyKind::Naive, ProtocolKind::IrrelevantContext);
    inputs.protocol.injected_count = 3;
    auto report = run_protocol(inputs);
    CHECK(report.metadata.at("injected_count") == "3");
    for (const auto& r : report.records) {
        REQUIRE(r.usable());
        CHECK(r.trace.steps[0].retrieved_ids.size() == 4 + 3);
        bool noted = false;
        for (const auto& n : r.notes) noted |= n.rfind("irrelevant_injected:", 0) == 0;
        CHECK(noted);
    }
}

TEST_CASE("resubstitution coverage on the calibration split holds by construction") {
    FixtureHarness h;
    auto report = run_protocol(h.inputs(strategies::StrategyKind::Naive, ProtocolKind::Normal));
    std::vector<InstanceRecord> cal;
    for (const auto& r : report.records) {
        if (r.in_calibration && r.headline_eligible()) cal.push_back(r);
    }
    REQUIRE(!cal.empty());
    for (auto method : {core::ScoreMethod::LAC, core::ScoreMethod::APS}) {
        auto agg = aggregate(cal, method);
        CHECK(agg.cr >= 1.0 - 0.1 - 1e-12);
    }
    CHECK(report.invariant_violations.empty());
}

TEST_CASE("cr_floor violations are reported for a rigged world") {
    // calibration scripted confident-and-right, test confident-and-wrong:
    // exchangeability is broken on purpose and coverage collapses
    std::vector<core::McqaInstance> dataset;
    auto script = std::make_shared<MockScript>();
    for (int i = 0; i < 40; ++i) {
        core::McqaInstance inst;
        char id[16];
        std::snprintf(id, sizeof(id), "r%03d", i);
        inst.id = id;
        inst.question = std::string("Rigged item [qid:") + id + "] pick one.";
        inst.options = {"w", "x", "y", "z"};
        inst.answer_index = 0;
        inst.corpus_ref = "rig";
        dataset.push_back(inst);
    }
    auto split = core::split(dataset, 0.5, 9);
    std::set<std::string> cal(split.calibration_ids.begin(), split.calibration_ids.end());
    for (const auto& inst : dataset) {
        MockChatRule rule;
        std::vector<double> p(4, 0.03);
        if (cal.count(inst.id)) {
            p[0] = 0.91;  // right
        } else {
            p[1] = 0.91;  // confidently wrong
        }
        rule.probs = p;
        script->keyed_chat[inst.id] = rule;
    }

    strategies::PromptLibrary prompts;
    auto providers = providers::make_mock_providers(script);
    EvalInputs inputs;
    inputs.dataset = &dataset;
    inputs.split = &split;
    inputs.strategy = strategies::StrategyKind::NoRetrieve;
    inputs.protocol.kind = ProtocolKind::Normal;
    inputs.providers = providers;
    inputs.prompts = &prompts;
    inputs.options.alpha = 0.1;
    inputs.options.cr_floor = 0.88;
    inputs.options.dataset_name = "rigged";

    auto report = run_protocol(inputs);
    // q_hat comes from the well-behaved calibration half, so the wrong-gold
    // test half falls out of the sets
    CHECK(report.aggregates.cr_lac < 0.5);
    REQUIRE(!report.invariant_violations.empty());
    bool lac = false, aps = false;
    for (const auto& v : report.invariant_violations) {
        lac |= v == "cr_floor_LAC";
        aps |= v == "cr_floor_APS";
    }
    CHECK(lac);
    CHECK(aps);
}

TEST_CASE("report artifacts round-trip through save and load") {
    namespace fs = std::filesystem;
    FixtureHarness h;
    auto report = run_protocol(h.inputs(strategies::StrategyKind::Naive, ProtocolKind::Normal));
    std::string dir = (fs::temp_directory_path() / "urag_report_roundtrip").string();
    fs::remove_all(dir);
    save_report(report, dir);
    auto loaded = load_report(dir);
    CHECK(loaded.strategy == report.strategy);
    CHECK(loaded.aggregates.acc == doctest::Approx(report.aggregates.acc).epsilon(1e-12));
    CHECK(loaded.aggregates.ss_headline ==
          doctest::Approx(report.aggregates.ss_headline).epsilon(1e-12));
    CHECK(loaded.records.size() == report.records.size());
    CHECK(report_to_json(loaded).dump() == report_to_json(report).dump());

    // schema mismatch is rejected
    {
        std::ifstream in(fs::path(dir) / "report.json");
        nlohmann::json j;
        in >> j;
        j["schema_version"] = 999;
        std::ofstream out(fs::path(dir) / "report.json");
        out << j.dump(2) << '\n';
    }
    CHECK_THROWS_AS(load_report(dir), ReportError);
}

TEST_CASE("aggregates csv parses back to the same values within 1e-9") {
    FixtureHarness h;
    auto report = run_protocol(h.inputs(strategies::StrategyKind::Naive, ProtocolKind::Normal));
    std::string csv = render_aggregates_csv(report);
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);  // header
    bool saw_lac = false;
    while (std::getline(lines, line)) {
        std::vector<std::string> cells;
        std::istringstream cell_stream(line);
        std::string cell;
        while (std::getline(cell_stream, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 10);
        if (cells[3] == "all" && cells[4] == "LAC") {
            saw_lac = true;
            CHECK(std::abs(std::stod(cells[5]) - report.aggregates.acc) < 1e-9);
            CHECK(std::abs(std::stod(cells[6]) - report.aggregates.cr_lac) < 1e-9);
            CHECK(std::abs(std::stod(cells[7]) - report.aggregates.ss_lac) < 1e-9);
            CHECK(std::abs(std::stod(cells[8]) - report.aggregates.ss_headline) < 1e-9);
        }
    }
    CHECK(saw_lac);
}
