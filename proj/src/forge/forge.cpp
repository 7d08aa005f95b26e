#include "urag/forge/forge.hpp"

#include <algorithm>
#include <set>

#include "urag/core/rng.hpp"
#include "urag/core/text.hpp"

namespace urag::forge {

using nlohmann::json;

bool valid_similarity_type(const std::string& type) {
    return type == "role-similar" || type == "time-similar" || type == "lexical-similar" ||
           type == "topic-similar";
}

std::optional<json> extract_json_object(const std::string& completion) {
    auto start = completion.find('{');
    while (start != std::string::npos) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < completion.size(); ++i) {
            char c = completion[i];
            if (escaped) {
                escaped = false;
                continue;
            }
            if (c == '\\') {
                escaped = true;
                continue;
            }
            if (c == '"') in_string = !in_string;
            if (in_string) continue;
            if (c == '{') ++depth;
            if (c == '}') {
                --depth;
                if (depth == 0) {
                    try {
                        return json::parse(completion.substr(start, i - start + 1));
                    } catch (const json::exception&) {
                        break;  // try the next opening brace
                    }
                }
            }
        }
        start = completion.find('{', start + 1);
    }
    return std::nullopt;
}

namespace {

std::string render_generation_prompt(const strategies::PromptLibrary& prompts, ForgeMode mode,
                                     const std::string& question, const std::string& correct,
                                     const std::string& context,
                                     const std::string& old_incorrect) {
    if (!old_incorrect.empty()) {
        return prompts.render("forge_regen", {{"original_document", context},
                                              {"question", question},
                                              {"correct_answer", correct},
                                              {"old_incorrect_answer", old_incorrect}});
    }
    if (mode == ForgeMode::Naive) {
        return prompts.render("forge_naive",
                              {{"question", question}, {"correct_answer", correct}});
    }
    return prompts.render("forge_full", {{"original_document", context},
                                         {"question", question},
                                         {"correct_answer", correct}});
}

std::optional<DistractorCandidate> parse_candidate(const std::string& completion, ForgeMode mode,
                                                   int iteration) {
    auto parsed = extract_json_object(completion);
    if (!parsed) return std::nullopt;
    const json& j = *parsed;
    if (!j.contains("fake_answer") || !j["fake_answer"].is_string()) return std::nullopt;

    DistractorCandidate candidate;
    candidate.text = core::trim(j["fake_answer"].get<std::string>());
    candidate.source_iteration = iteration;
    if (candidate.text.empty()) return std::nullopt;

    if (mode == ForgeMode::Full) {
        if (!j.contains("similarity_type") || !j["similarity_type"].is_string())
            return std::nullopt;
        candidate.similarity_type = core::trim(j["similarity_type"].get<std::string>());
        if (!valid_similarity_type(candidate.similarity_type)) return std::nullopt;
        if (!j.contains("fake_document_title") || !j.contains("fake_document_excerpt"))
            return std::nullopt;
        candidate.fake_document_title = j["fake_document_title"].get<std::string>();
        candidate.fake_document_excerpt = j["fake_document_excerpt"].get<std::string>();
        if (candidate.fake_document_title.empty() && candidate.fake_document_excerpt.empty())
            return std::nullopt;
    } else if (j.contains("similarity_type") && j["similarity_type"].is_string()) {
        candidate.similarity_type = j["similarity_type"].get<std::string>();
    }
    return candidate;
}

}  // namespace

std::vector<DistractorCandidate> generate_distractors(
    providers::ChatProvider& chat, const strategies::PromptLibrary& prompts,
    const std::string& question, const std::string& correct_answer,
    const std::string& retrieved_context, int count, ForgeMode mode, const ForgeConfig& config,
    int iteration, ForgeProvenance* provenance) {
    if (count < 1) throw core::ArgumentError("generate_distractors: count must be >= 1");

    std::vector<DistractorCandidate> candidates;
    std::set<std::string> taken;  // normalized texts already used
    taken.insert(core::normalize_ws(correct_answer));

    for (int slot = 0; slot < count; ++slot) {
        std::string old_incorrect;  // non-empty switches to the regeneration prompt
        std::string last_raw;
        bool accepted = false;
        for (int attempt = 0; attempt <= config.parse_retries; ++attempt) {
            std::string prompt = render_generation_prompt(prompts, mode, question, correct_answer,
                                                          retrieved_context, old_incorrect);
            providers::ChatRequest request;
            request.temperature = config.temperature;
            request.max_tokens = 768;
            request.messages.push_back({"user", prompt});
            providers::ChatResult result = chat.chat(request);
            last_raw = result.text;
            if (provenance) {
                provenance->prompts.push_back(prompt);
                provenance->completions.push_back(result.text);
            }

            ForgeMode parse_mode = old_incorrect.empty() ? mode : ForgeMode::Full;
            auto candidate = parse_candidate(result.text, parse_mode, iteration);
            if (!candidate) {
                old_incorrect = old_incorrect.empty() ? "(unparseable)" : old_incorrect;
                continue;
            }
            std::string normalized = core::normalize_ws(candidate->text);
            if (taken.count(normalized)) {
                // equal to the correct answer or a duplicate: reject and
                // re-request citing the offending text
                old_incorrect = candidate->text;
                continue;
            }
            taken.insert(normalized);
            candidates.push_back(std::move(*candidate));
            accepted = true;
            break;
        }
        if (!accepted) {
            throw core::ForgeError("generate_distractors: no valid candidate after " +
                                       std::to_string(config.parse_retries + 1) + " attempts",
                                   last_raw);
        }
    }
    return candidates;
}

ForgeVerdict gate_difficulty(providers::NliProvider& nli, const std::string& question,
                             const std::string& correct_answer,
                             const std::vector<DistractorCandidate>& candidates,
                             double threshold) {
    if (candidates.empty()) throw core::ArgumentError("gate_difficulty: no candidates");

    ForgeVerdict verdict;
    std::string premise = question + " " + correct_answer;
    for (const auto& candidate : candidates) {
        try {
            auto v = nli.nli(premise, question + " " + candidate.text);
            verdict.entail_probs.push_back(v.entail);
        } catch (const core::Error&) {
            // candidate unknown; excluded from the max
        }
    }
    for (double p : verdict.entail_probs) {
        if (p >= threshold) {
            verdict.difficult = true;
            break;
        }
    }
    return verdict;
}

ForgedInstance forge_instance(providers::ChatProvider& chat, providers::NliProvider& nli,
                              const strategies::PromptLibrary& prompts, const std::string& id,
                              const std::string& question, const std::string& correct_answer,
                              const std::string& retrieved_context,
                              const std::string& corpus_ref, const ForgeConfig& config) {
    if (config.max_iterations < 1)
        throw core::ArgumentError("forge_instance: max_iterations must be >= 1");

    ForgedInstance out;
    out.provenance.instance_id = id;

    auto candidates =
        generate_distractors(chat, prompts, question, correct_answer, retrieved_context,
                             config.distractor_count, config.initial_mode, config, 0,
                             &out.provenance);
    ForgeVerdict verdict =
        gate_difficulty(nli, question, correct_answer, candidates, config.nli_threshold);
    out.provenance.entail_probs_per_iteration.push_back(verdict.entail_probs);

    int iteration = 0;
    while (!verdict.difficult && iteration < config.max_iterations) {
        ++iteration;
        // the regeneration prompt cites each prior failed distractor
        std::vector<DistractorCandidate> regenerated;
        std::set<std::string> taken{core::normalize_ws(correct_answer)};
        for (const auto& old : candidates) {
            std::string prompt = render_generation_prompt(prompts, ForgeMode::Full, question,
                                                          correct_answer, retrieved_context,
                                                          old.text);
            providers::ChatRequest request;
            request.temperature = config.temperature;
            request.max_tokens = 768;
            request.messages.push_back({"user", prompt});

            std::optional<DistractorCandidate> candidate;
            std::string last_raw;
            for (int attempt = 0; attempt <= config.parse_retries; ++attempt) {
                providers::ChatResult result = chat.chat(request);
                last_raw = result.text;
                out.provenance.prompts.push_back(prompt);
                out.provenance.completions.push_back(result.text);
                candidate = parse_candidate(result.text, ForgeMode::Full, iteration);
                if (candidate && !taken.count(core::normalize_ws(candidate->text))) break;
                candidate.reset();
            }
            if (candidate) {
                taken.insert(core::normalize_ws(candidate->text));
                regenerated.push_back(std::move(*candidate));
            } else {
                // keep the old candidate rather than dropping the slot
                taken.insert(core::normalize_ws(old.text));
                regenerated.push_back(old);
            }
        }
        candidates = std::move(regenerated);
        verdict = gate_difficulty(nli, question, correct_answer, candidates, config.nli_threshold);
        out.provenance.entail_probs_per_iteration.push_back(verdict.entail_probs);
    }

    verdict.iterations_used = iteration;
    out.provenance.iterations_used = iteration;
    out.provenance.difficult = verdict.difficult;
    out.provenance.not_difficult_flag = !verdict.difficult;

    // assemble options with a seed-determined permutation
    std::vector<std::string> options{correct_answer};
    for (const auto& c : candidates) options.push_back(c.text);
    core::Rng rng(core::mix_seed(config.seed, id));
    core::shuffle_inplace(options, rng);

    core::McqaInstance instance;
    instance.id = id;
    instance.question = question;
    instance.options = options;
    instance.corpus_ref = corpus_ref;
    auto it = std::find(options.begin(), options.end(), correct_answer);
    instance.answer_index = static_cast<std::size_t>(it - options.begin());
    if (!verdict.difficult) instance.tags.push_back("not_difficult");
    instance.validate();

    out.instance = std::move(instance);
    out.verdict = verdict;
    return out;
}

ForgeReport forge_report(const std::vector<ForgeVerdict>& verdicts, int max_iterations) {
    if (verdicts.empty()) throw core::ArgumentError("forge_report: no verdicts");
    ForgeReport report;
    auto total = static_cast<double>(verdicts.size());
    for (int iteration = 0; iteration <= max_iterations; ++iteration) {
        std::size_t difficult = 0;
        for (const auto& v : verdicts) {
            if (v.difficult && v.iterations_used <= iteration) ++difficult;
        }
        report.difficult_percent_by_iteration.push_back(100.0 * difficult / total);
    }
    return report;
}

}  // namespace urag::forge
