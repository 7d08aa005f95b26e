#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "urag/core/errors.hpp"

namespace urag::strategies {

enum class StrategyKind { NoRetrieve, Naive, Fusion, Hyde, Raptor, Replug, SelfRag, Rat };

StrategyKind parse_strategy(const std::string& name);
const char* strategy_name(StrategyKind kind);

struct SelfRagWeights {
    double rel = 1.0 / 3.0;
    double sup = 1.0 / 3.0;
    double use = 1.0 / 3.0;
};

struct RaptorParams {
    std::size_t chunk_tokens = 100;
    int max_depth = 5;
    double responsibility_threshold = 0.1;
    int max_clusters = 8;
    std::string reducer = "pca";  // "pca" | "none"
};

struct StrategyConfig {
    std::string name = "naive";
    std::size_t retrieval_depth = 10;       // k
    std::size_t max_context_tokens = 4000;
    int iterations = 3;                      // RAT rounds T
    int query_count = 4;                     // Fusion n
    std::size_t fusion_smoothing_k = 60;
    double fusion_temperature = 0.9;
    SelfRagWeights selfrag_weights;
    std::size_t selfrag_depth = 5;           // Self-RAG retrieves up to 5 passages
    RaptorParams raptor;
    double temperature = 0.1;
    std::uint64_t seed = 0;

    void validate() const {
        if (retrieval_depth < 1) throw core::UsageError("strategy.k", "must be >= 1");
        if (iterations < 1) throw core::UsageError("strategy.iterations", "must be >= 1");
        if (name == "fusion" && query_count < 2)
            throw core::UsageError("strategy.query_count", "fusion needs n >= 2");
        double sum = selfrag_weights.rel + selfrag_weights.sup + selfrag_weights.use;
        if (selfrag_weights.rel < 0 || selfrag_weights.sup < 0 || selfrag_weights.use < 0)
            throw core::UsageError("strategy.selfrag_weights", "must be non-negative");
        if (std::abs(sum - 1.0) > 1e-9)
            throw core::UsageError("strategy.selfrag_weights", "must sum to 1");
        if (max_context_tokens < 1)
            throw core::UsageError("strategy.max_context_tokens", "must be >= 1");
        if (raptor.chunk_tokens < 1)
            throw core::UsageError("strategy.raptor.chunk_tokens", "must be >= 1");
        if (raptor.reducer != "pca" && raptor.reducer != "none")
            throw core::UsageError("strategy.raptor.reducer", "must be 'pca' or 'none'");
    }
};

}  // namespace urag::strategies
