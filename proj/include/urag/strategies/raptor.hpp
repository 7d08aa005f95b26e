#pragma once

#include <string>
#include <vector>

#include "urag/core/types.hpp"
#include "urag/providers/provider.hpp"
#include "urag/strategies/config.hpp"
#include "urag/strategies/prompts.hpp"

namespace urag::strategies {

struct RaptorNode {
    std::string id;
    std::string text;
    std::vector<double> embedding;       // unit-norm
    std::vector<std::size_t> children;   // indices into RaptorTree::nodes
    int depth = 0;                       // 0 = leaf chunk
};

// Hierarchical index: leaves are corpus chunks, upper layers are generated
// summaries of soft clusters.
struct RaptorTree {
    std::string corpus_ref;
    std::vector<RaptorNode> nodes;
    std::vector<std::vector<std::size_t>> layers;  // layers[0] = leaves
    std::vector<std::string> build_flags;

    const std::vector<std::size_t>& leaves() const { return layers.front(); }
};

// Whitespace-respecting segmentation into chunks of at most chunk_tokens.
std::vector<std::string> chunk_text(const std::string& text, std::size_t chunk_tokens);

RaptorTree build_raptor_tree(const std::vector<core::Document>& corpus,
                             const StrategyConfig& config, providers::EmbedProvider& embedder,
                             providers::ChatProvider& chat, const PromptLibrary& prompts,
                             const std::string& corpus_ref = "");

}  // namespace urag::strategies
