#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "urag/eval/report.hpp"
#include "urag/providers/provider.hpp"
#include "urag/retrieval/index.hpp"
#include "urag/strategies/strategies.hpp"

namespace urag::eval {

enum class ProtocolKind {
    Normal,
    SelfAware,
    WrongAware,
    IrrelevantContext,
    KnowledgeIsolation,
    DepthSweep
};

ProtocolKind parse_protocol(const std::string& name);
const char* protocol_name(ProtocolKind kind);

struct ProtocolSpec {
    ProtocolKind kind = ProtocolKind::Normal;
    std::size_t injected_count = 10;       // IrrelevantContext
    bool fresh_per_step = true;            // fresh irrelevant sample per retrieval step
    std::vector<std::size_t> k_list;       // DepthSweep
    ProtocolKind base = ProtocolKind::Normal;

    void validate() const;
};

struct RunOptions {
    double alpha = 0.1;
    std::uint64_t seed = 0;
    int concurrency = 8;
    bool force_nonempty = false;
    bool one_hot_fallback = false;
    double cr_floor = 0.0;  // 0 disables the embedded test-coverage floor
    bool wrong_aware_swap_second = false;
    std::string config_hash;
    std::string dataset_name;
    // persisted thresholds reused across runs of the same strategy/provider pair
    std::optional<conformal::CalibrationModel> model_lac_override;
    std::optional<conformal::CalibrationModel> model_aps_override;
};

struct EvalInputs {
    const std::vector<core::McqaInstance>* dataset = nullptr;
    const core::SplitSpec* split = nullptr;
    strategies::StrategyKind strategy = strategies::StrategyKind::Naive;
    strategies::StrategyConfig config;
    ProtocolSpec protocol;
    providers::Providers providers;
    const retrieval::VectorIndex* index = nullptr;
    const strategies::RaptorTree* tree = nullptr;
    const std::vector<core::Document>* corpus = nullptr;
    const strategies::PromptLibrary* prompts = nullptr;
    RunOptions options;
};

// Inserts the confidence block at the {confidence_block} placeholder.
std::string apply_self_aware(const std::string& prompt_with_placeholder,
                             const core::OptionDistribution& distribution);

// Display copy with the maximum and minimum entries exchanged (first max,
// last min); the evaluated distribution itself is never altered.
// swap_second exchanges the maximum with the second-highest instead.
core::OptionDistribution apply_wrong_aware(const core::OptionDistribution& distribution,
                                           bool swap_second = false);

// Partitions ids by top-1 correctness of a no-retrieve baseline report.
std::pair<std::vector<std::string>, std::vector<std::string>> knowledge_isolation_split(
    const std::vector<core::McqaInstance>& dataset, const RunReport& baseline_report);

RunReport run_protocol(const EvalInputs& inputs);

// One full run per k, everything else held fixed; a failure in one k
// isolates to that report.
std::vector<RunReport> depth_sweep(const EvalInputs& inputs);

}  // namespace urag::eval
