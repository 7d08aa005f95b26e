#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "urag/core/errors.hpp"

namespace urag::providers {

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string text;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.1;
    int max_tokens = 512;
    bool want_logprobs = false;
    int logprob_top_n = 0;

    void validate() const {
        if (messages.empty()) throw core::ArgumentError("chat request: no messages");
        if (temperature < 0.0 || temperature > 2.0)
            throw core::ArgumentError("chat request: temperature outside [0,2]");
        if (want_logprobs && logprob_top_n < 1)
            throw core::ArgumentError("chat request: logprob_top_n must be >= 1");
    }

    // All message text joined; the surface mock matchers run against.
    std::string flattened() const {
        std::string out;
        for (const auto& m : messages) {
            if (!out.empty()) out += '\n';
            out += m.text;
        }
        return out;
    }
};

struct LogprobCandidate {
    std::string token;
    double logprob = 0.0;  // <= 0
};

// Per-position top-n candidates for the first generated positions,
// each candidate list sorted descending by logprob.
struct TokenLogprobs {
    std::vector<std::vector<LogprobCandidate>> positions;

    void validate() const {
        for (const auto& pos : positions) {
            double prev = 0.0;
            bool first = true;
            for (const auto& cand : pos) {
                if (cand.logprob > 1e-9)
                    throw core::IntegrityError("logprob " + std::to_string(cand.logprob) +
                                               " is positive");
                if (!first && cand.logprob > prev + 1e-12)
                    throw core::IntegrityError("candidate list not sorted by logprob");
                prev = cand.logprob;
                first = false;
            }
        }
    }
};

struct ChatResult {
    std::string text;
    std::optional<TokenLogprobs> logprobs;
    int retries_used = 0;
};

struct NliVerdict {
    double entail = 0.0;
    double neutral = 0.0;
    double contradict = 0.0;
    bool renormalized = false;  // backend fields did not sum to 1; client rescaled

    void validate() const {
        for (double v : {entail, neutral, contradict}) {
            if (v < -1e-9 || v > 1.0 + 1e-9)
                throw core::IntegrityError("nli field outside [0,1]");
        }
        double sum = entail + neutral + contradict;
        if (std::abs(sum - 1.0) > 1e-6)
            throw core::IntegrityError("nli fields sum to " + std::to_string(sum));
    }
};

}  // namespace urag::providers
