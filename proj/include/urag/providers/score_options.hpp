#pragma once

#include <optional>
#include <string>
#include <vector>

#include "urag/core/types.hpp"
#include "urag/providers/provider.hpp"

namespace urag::providers {

struct ScoreOptionsConfig {
    double temperature = 0.1;
    int logprob_top_n = 0;         // 0 -> option count
    bool one_hot_fallback = false; // parse "Answer|X" when logprobs unusable; watermark
};

struct ScoreOptionsResult {
    core::OptionDistribution distribution;
    std::vector<std::string> flags;  // "floor_rule", "one_hot_fallback"
    ChatResult raw;
};

// Softmax restricted to the option-label logits.
core::OptionDistribution restricted_softmax(const std::vector<double>& label_logits);

// Per-label logprobs read off the answer position: the first generated
// position whose candidate list contains any option label. Labels absent
// from that position's top-n are floored at (min observed - 10) and the
// record is flagged. Returns nothing when no position holds any label.
struct LabelExtraction {
    std::vector<double> logits;
    bool floored = false;
};
std::optional<LabelExtraction> extract_label_logits(const TokenLogprobs& logprobs,
                                                    std::size_t option_count);

// Parses the literal "Answer|X" contract; npos when absent.
std::size_t parse_answer_letter(const std::string& completion, std::size_t option_count);

// Full Alg-A1 path: request logprobs, restrict to the labels, softmax.
ScoreOptionsResult score_options(ChatProvider& chat, const std::vector<ChatMessage>& messages,
                                 std::size_t option_count, const ScoreOptionsConfig& config = {});

}  // namespace urag::providers
