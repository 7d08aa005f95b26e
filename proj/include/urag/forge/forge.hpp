#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "urag/core/types.hpp"
#include "urag/providers/provider.hpp"
#include "urag/strategies/prompts.hpp"

namespace urag::forge {

enum class ForgeMode { Naive, Full };

struct DistractorCandidate {
    std::string text;
    std::string similarity_type;  // role-similar | time-similar | lexical-similar | topic-similar
    std::string fake_document_title;
    std::string fake_document_excerpt;
    int source_iteration = 0;
};

struct ForgeVerdict {
    bool difficult = false;
    std::vector<double> entail_probs;  // per surviving candidate
    int iterations_used = 0;
};

struct ForgeConfig {
    int distractor_count = 3;  // K = 4 with the correct answer
    int max_iterations = 3;    // regeneration rounds after the initial pass
    double nli_threshold = 0.5;
    int parse_retries = 3;
    ForgeMode initial_mode = ForgeMode::Naive;  // regenerations always use the full prompt
    std::uint64_t seed = 0;
    double temperature = 0.1;
};

// Everything the pipeline saw, for the sidecar provenance file.
struct ForgeProvenance {
    std::string instance_id;
    std::vector<std::string> prompts;
    std::vector<std::string> completions;
    std::vector<std::vector<double>> entail_probs_per_iteration;
    int iterations_used = 0;
    bool difficult = false;
    bool not_difficult_flag = false;
};

bool valid_similarity_type(const std::string& type);

// Extracts the first JSON object from a completion (models often wrap it).
std::optional<nlohmann::json> extract_json_object(const std::string& completion);

std::vector<DistractorCandidate> generate_distractors(
    providers::ChatProvider& chat, const strategies::PromptLibrary& prompts,
    const std::string& question, const std::string& correct_answer,
    const std::string& retrieved_context, int count, ForgeMode mode, const ForgeConfig& config,
    int iteration, ForgeProvenance* provenance = nullptr);

// entail = nli(premise = question + correct, hypothesis = question + candidate);
// difficult iff any candidate's entailment clears the threshold.
ForgeVerdict gate_difficulty(providers::NliProvider& nli, const std::string& question,
                             const std::string& correct_answer,
                             const std::vector<DistractorCandidate>& candidates,
                             double threshold);

struct ForgedInstance {
    core::McqaInstance instance;
    ForgeVerdict verdict;
    ForgeProvenance provenance;
};

ForgedInstance forge_instance(providers::ChatProvider& chat, providers::NliProvider& nli,
                              const strategies::PromptLibrary& prompts, const std::string& id,
                              const std::string& question, const std::string& correct_answer,
                              const std::string& retrieved_context,
                              const std::string& corpus_ref, const ForgeConfig& config);

// Percentage of instances difficult after iteration 0..max; non-decreasing.
struct ForgeReport {
    std::vector<double> difficult_percent_by_iteration;
};

ForgeReport forge_report(const std::vector<ForgeVerdict>& verdicts, int max_iterations);

}  // namespace urag::forge
