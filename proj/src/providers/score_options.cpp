#include "urag/providers/score_options.hpp"

#include <algorithm>
#include <cmath>

#include "urag/core/text.hpp"

namespace urag::providers {

core::OptionDistribution restricted_softmax(const std::vector<double>& label_logits) {
    return core::OptionDistribution(core::softmax(label_logits));
}

std::optional<LabelExtraction> extract_label_logits(const TokenLogprobs& logprobs,
                                                    std::size_t option_count) {
    for (const auto& position : logprobs.positions) {
        std::vector<std::optional<double>> found(option_count);
        bool any = false;
        for (const auto& cand : position) {
            std::string tok = core::trim(cand.token);
            if (tok.size() != 1) continue;
            std::size_t idx = core::letter_index(tok[0]);
            if (idx == std::string::npos || idx >= option_count) continue;
            if (!found[idx]) {
                found[idx] = cand.logprob;
                any = true;
            }
        }
        if (!any) continue;

        double min_observed = 0.0;
        bool first = true;
        for (const auto& f : found) {
            if (f && (first || *f < min_observed)) {
                min_observed = *f;
                first = false;
            }
        }
        LabelExtraction out;
        out.logits.resize(option_count);
        for (std::size_t i = 0; i < option_count; ++i) {
            if (found[i]) {
                out.logits[i] = *found[i];
            } else {
                out.logits[i] = min_observed - 10.0;
                out.floored = true;
            }
        }
        return out;
    }
    return std::nullopt;
}

std::size_t parse_answer_letter(const std::string& completion, std::size_t option_count) {
    auto pos = completion.find("Answer|");
    if (pos == std::string::npos) return std::string::npos;
    pos += 7;
    while (pos < completion.size() &&
           std::isspace(static_cast<unsigned char>(completion[pos])))
        ++pos;
    if (pos >= completion.size()) return std::string::npos;
    std::size_t idx = core::letter_index(completion[pos]);
    if (idx == std::string::npos || idx >= option_count) return std::string::npos;
    return idx;
}

ScoreOptionsResult score_options(ChatProvider& chat, const std::vector<ChatMessage>& messages,
                                 std::size_t option_count, const ScoreOptionsConfig& config) {
    if (option_count < 2) throw core::ArgumentError("score_options: need at least 2 options");
    if (option_count > 26)
        throw core::ArgumentError("score_options: letter labels support at most 26 options");

    ChatRequest request;
    request.messages = messages;
    request.temperature = config.temperature;
    request.want_logprobs = true;
    request.logprob_top_n =
        std::max(config.logprob_top_n, static_cast<int>(option_count));
    request.validate();

    ScoreOptionsResult result;
    result.raw = chat.chat(request);

    if (result.raw.logprobs) {
        auto extraction = extract_label_logits(*result.raw.logprobs, option_count);
        if (extraction) {
            result.distribution = restricted_softmax(extraction->logits);
            if (extraction->floored) result.flags.push_back("floor_rule");
            return result;
        }
    }

    if (config.one_hot_fallback) {
        std::size_t idx = parse_answer_letter(result.raw.text, option_count);
        if (idx != std::string::npos) {
            std::vector<double> probs(option_count, 0.0);
            probs[idx] = 1.0;
            result.distribution = core::OptionDistribution(probs);
            result.flags.push_back("one_hot_fallback");
            return result;
        }
        throw core::CapabilityError(
            "score_options: no usable logprobs and completion lacks the Answer|X contract: '" +
            result.raw.text + "'");
    }
    throw core::CapabilityError(
        result.raw.logprobs
            ? "score_options: no option label found among logprob candidates"
            : "score_options: backend returned no token logprobs");
}

}  // namespace urag::providers
