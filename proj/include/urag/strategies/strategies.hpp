#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "urag/core/types.hpp"
#include "urag/providers/provider.hpp"
#include "urag/providers/score_options.hpp"
#include "urag/retrieval/index.hpp"
#include "urag/strategies/config.hpp"
#include "urag/strategies/prompts.hpp"
#include "urag/strategies/raptor.hpp"

namespace urag::strategies {

// Protocol-level knobs applied around a strategy run without touching the
// strategy itself: confidence exposure and irrelevant-document injection.
struct ProtocolOverlay {
    std::string confidence_block;       // rendered; empty under the normal protocol
    std::size_t inject_irrelevant = 0;  // docs added after every retrieval
    bool inject_fresh_per_step = true;  // fresh sample per retrieval step
    std::uint64_t run_seed = 0;
};

struct ReflectionScores {
    double rel = 0.5;
    double sup = 0.5;
    double use = 0.5;
    bool malformed = false;  // nothing parseable; defaults (0.5, 0.5, 0.6) applied
};

// Parses "Relevance:/Support:/Utility:" judgment lines into [0,1] scores.
ReflectionScores parse_reflection(const std::string& completion);

double composite_reflection_score(const ReflectionScores& scores, const SelfRagWeights& weights);

// Similarity-softmax ensemble of per-document option distributions:
// lambda = softmax(similarities), output = sum_d lambda_d * p_d.
core::OptionDistribution replug_mixture(const std::vector<double>& similarities,
                                        const std::vector<core::OptionDistribution>& distributions);

// Stateless policy executor over shared read-only providers and indices.
// Instances may run concurrently; one instance's steps are sequential.
class StrategyRunner {
public:
    StrategyRunner(StrategyKind kind, StrategyConfig config, providers::Providers providers,
                   const retrieval::VectorIndex* index, const RaptorTree* tree,
                   const std::vector<core::Document>* corpus, const PromptLibrary* prompts,
                   providers::ScoreOptionsConfig score_config = {});

    core::StrategyTrace run(const core::McqaInstance& instance,
                            const ProtocolOverlay& overlay = {}) const;

    StrategyKind kind() const { return kind_; }
    const StrategyConfig& config() const { return config_; }

    core::StrategyTrace run_no_retrieve(const core::McqaInstance&, const ProtocolOverlay&) const;
    core::StrategyTrace run_naive(const core::McqaInstance&, const ProtocolOverlay&) const;
    core::StrategyTrace run_fusion(const core::McqaInstance&, const ProtocolOverlay&) const;
    core::StrategyTrace run_hyde(const core::McqaInstance&, const ProtocolOverlay&) const;
    core::StrategyTrace run_raptor(const core::McqaInstance&, const ProtocolOverlay&) const;
    core::StrategyTrace run_replug(const core::McqaInstance&, const ProtocolOverlay&) const;
    core::StrategyTrace run_selfrag(const core::McqaInstance&, const ProtocolOverlay&) const;
    core::StrategyTrace run_rat(const core::McqaInstance&, const ProtocolOverlay&) const;

private:
    StrategyKind kind_;
    StrategyConfig config_;
    providers::Providers providers_;
    const retrieval::VectorIndex* index_;
    const RaptorTree* tree_;
    const PromptLibrary* prompts_;
    providers::ScoreOptionsConfig score_config_;
    std::unordered_map<std::string, const core::Document*> documents_;

    const retrieval::VectorIndex& index_or_throw() const;

    std::vector<double> embed_text(const std::string& text) const;
    std::string chat_text(const std::vector<providers::ChatMessage>& messages, double temperature,
                          core::StrategyTrace& trace, const std::string& action,
                          const std::string& query = "",
                          const std::vector<std::string>& retrieved = {}) const;

    // top-k search plus protocol injection; records a trace step.
    std::vector<retrieval::ScoredHit> retrieve(const std::string& query_text,
                                               const std::vector<double>& query_vector,
                                               std::size_t k, const core::McqaInstance& instance,
                                               std::size_t step_counter,
                                               const ProtocolOverlay& overlay,
                                               core::StrategyTrace& trace,
                                               const std::string& action = "search") const;

    std::string document_text(const std::string& doc_id) const;
    std::string assemble_context(const std::vector<std::string>& doc_ids,
                                 std::size_t budget_tokens, core::StrategyTrace& trace) const;
    std::string assemble_texts(const std::vector<std::string>& texts, std::size_t budget_tokens,
                               core::StrategyTrace& trace) const;

    core::OptionDistribution score_mcqa(const core::McqaInstance& instance,
                                        const std::string& template_name,
                                        std::map<std::string, std::string> values,
                                        const ProtocolOverlay& overlay,
                                        core::StrategyTrace& trace,
                                        const std::string& action = "score") const;
};

}  // namespace urag::strategies
