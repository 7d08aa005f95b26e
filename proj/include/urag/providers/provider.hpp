#pragma once

#include <memory>
#include <string>
#include <vector>

#include "urag/core/numeric.hpp"
#include "urag/providers/types.hpp"

namespace urag::providers {

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual ChatResult chat(const ChatRequest& request) = 0;
    virtual std::string identity() const = 0;
};

// Client-side L2 normalization is applied regardless of what the backend
// returns; implementations override embed_raw only.
class EmbedProvider {
public:
    virtual ~EmbedProvider() = default;
    virtual std::string identity() const = 0;

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) {
        if (texts.empty()) throw core::ArgumentError("embed: empty batch");
        for (const auto& t : texts) {
            if (t.empty()) throw core::ArgumentError("embed: empty text in batch");
        }
        auto vectors = embed_raw(texts);
        if (vectors.size() != texts.size())
            throw core::ProviderError("embed: backend returned " +
                                      std::to_string(vectors.size()) + " vectors for " +
                                      std::to_string(texts.size()) + " inputs");
        std::size_t dim = vectors.empty() ? 0 : vectors.front().size();
        for (auto& v : vectors) {
            if (v.size() != dim)
                throw core::ProviderError("embed: dimension mismatch within batch");
            core::l2_normalize(v);
        }
        return vectors;
    }

    std::vector<double> embed_one(const std::string& text) { return embed({text}).front(); }

protected:
    virtual std::vector<std::vector<double>> embed_raw(const std::vector<std::string>& texts) = 0;
};

class NliProvider {
public:
    virtual ~NliProvider() = default;
    virtual std::string identity() const = 0;

    NliVerdict nli(const std::string& premise, const std::string& hypothesis) {
        if (premise.empty() || hypothesis.empty())
            throw core::ArgumentError("nli: premise and hypothesis must be non-empty");
        NliVerdict v = nli_raw(premise, hypothesis);
        double sum = v.entail + v.neutral + v.contradict;
        if (sum <= 0.0)
            throw core::ProviderError("nli: backend returned non-positive field sum");
        if (std::abs(sum - 1.0) > 1e-6) {
            v.entail /= sum;
            v.neutral /= sum;
            v.contradict /= sum;
            v.renormalized = true;
        }
        v.validate();
        return v;
    }

protected:
    virtual NliVerdict nli_raw(const std::string& premise, const std::string& hypothesis) = 0;
};

struct Providers {
    std::shared_ptr<ChatProvider> chat;
    std::shared_ptr<EmbedProvider> embedder;
    std::shared_ptr<NliProvider> nli;
};

}  // namespace urag::providers
