#include "urag/strategies/raptor.hpp"

#include <algorithm>
#include <sstream>

#include "urag/core/rng.hpp"
#include "urag/core/text.hpp"
#include "urag/strategies/gmm.hpp"

namespace urag::strategies {

std::vector<std::string> chunk_text(const std::string& text, std::size_t chunk_tokens) {
    if (chunk_tokens < 1) throw core::ArgumentError("chunk_text: chunk_tokens must be >= 1");
    std::vector<std::string> chunks;
    std::istringstream words(text);
    std::string word;
    std::string current;
    std::size_t max_chars = core::token_budget_chars(chunk_tokens);
    while (words >> word) {
        // oversized single words get hard-split
        while (word.size() > max_chars) {
            if (!current.empty()) {
                chunks.push_back(current);
                current.clear();
            }
            chunks.push_back(word.substr(0, max_chars));
            word.erase(0, max_chars);
        }
        if (word.empty()) continue;
        std::size_t extra = current.empty() ? word.size() : word.size() + 1;
        if (!current.empty() && current.size() + extra > max_chars) {
            chunks.push_back(current);
            current.clear();
        }
        if (!current.empty()) current += ' ';
        current += word;
    }
    if (!current.empty()) chunks.push_back(current);
    return chunks;
}

RaptorTree build_raptor_tree(const std::vector<core::Document>& corpus,
                             const StrategyConfig& config, providers::EmbedProvider& embedder,
                             providers::ChatProvider& chat, const PromptLibrary& prompts,
                             const std::string& corpus_ref) {
    if (corpus.empty()) throw core::ArgumentError("build_raptor_tree: empty corpus");

    RaptorTree tree;
    tree.corpus_ref = corpus_ref;
    std::vector<std::string> leaf_texts;
    for (const auto& doc : corpus) {
        auto chunks = chunk_text(doc.body, config.raptor.chunk_tokens);
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            RaptorNode node;
            node.id = doc.id + "#" + std::to_string(i);
            node.text = std::move(chunks[i]);
            node.depth = 0;
            leaf_texts.push_back(node.text);
            tree.nodes.push_back(std::move(node));
        }
    }
    if (tree.nodes.empty()) throw core::ArgumentError("build_raptor_tree: corpus chunked to nothing");

    auto leaf_vectors = embedder.embed(leaf_texts);
    tree.layers.emplace_back();
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        tree.nodes[i].embedding = std::move(leaf_vectors[i]);
        tree.layers.back().push_back(i);
    }

    std::vector<std::size_t> current = tree.layers.back();
    for (int depth = 1; current.size() > 2 && depth <= config.raptor.max_depth; ++depth) {
        const auto n = static_cast<Eigen::Index>(current.size());
        const auto dim = static_cast<Eigen::Index>(tree.nodes[current[0]].embedding.size());
        Eigen::MatrixXd X(n, dim);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& emb = tree.nodes[current[static_cast<std::size_t>(i)]].embedding;
            for (Eigen::Index j = 0; j < dim; ++j) X(i, j) = emb[static_cast<std::size_t>(j)];
        }
        Eigen::MatrixXd reduced =
            config.raptor.reducer == "pca" ? pca_reduce(X, std::min<int>(10, static_cast<int>(dim)))
                                           : X;

        core::Rng rng(core::mix_seed(config.seed, "raptor-layer-" + std::to_string(depth)));
        int k_max = std::min(config.raptor.max_clusters, static_cast<int>(current.size()) - 1);
        k_max = std::max(k_max, 1);
        GmmSelection selection = select_components_bic(reduced, k_max, rng);
        Eigen::MatrixXd resp = responsibilities(selection.model, reduced);

        // soft membership: every cluster with responsibility over the
        // threshold, and always the argmax cluster
        std::vector<std::vector<std::size_t>> members(
            static_cast<std::size_t>(selection.k));
        for (Eigen::Index i = 0; i < n; ++i) {
            int arg = 0;
            for (int j = 1; j < selection.k; ++j) {
                if (resp(i, j) > resp(i, arg)) arg = j;
            }
            for (int j = 0; j < selection.k; ++j) {
                if (j == arg || resp(i, j) >= config.raptor.responsibility_threshold) {
                    members[static_cast<std::size_t>(j)].push_back(
                        current[static_cast<std::size_t>(i)]);
                }
            }
        }

        std::vector<std::size_t> parents;
        std::vector<std::string> summary_texts;
        std::vector<std::vector<std::size_t>> parent_children;
        for (std::size_t j = 0; j < members.size(); ++j) {
            if (members[j].empty()) continue;
            std::vector<std::string> texts;
            for (auto idx : members[j]) texts.push_back(tree.nodes[idx].text);
            std::string joined = core::join(texts, "\n\n");
            std::string summary;
            try {
                providers::ChatRequest request;
                request.temperature = config.temperature;
                request.max_tokens = 512;
                request.messages.push_back(
                    {"user", prompts.render("raptor_summary", {{"passages", joined}})});
                summary = core::trim(chat.chat(request).text);
                if (summary.empty()) throw core::ProviderError("empty summary");
            } catch (const core::Error&) {
                summary = joined;
                core::truncate_to_tokens(summary, config.raptor.chunk_tokens * 4);
                tree.build_flags.push_back("raptor_summary_fallback");
            }
            summary_texts.push_back(summary);
            parent_children.push_back(members[j]);
        }
        if (summary_texts.empty()) break;

        auto summary_vectors = embedder.embed(summary_texts);
        for (std::size_t j = 0; j < summary_texts.size(); ++j) {
            RaptorNode node;
            node.id = "L" + std::to_string(depth) + "#" + std::to_string(j);
            node.text = std::move(summary_texts[j]);
            node.embedding = std::move(summary_vectors[j]);
            node.children = std::move(parent_children[j]);
            node.depth = depth;
            parents.push_back(tree.nodes.size());
            tree.nodes.push_back(std::move(node));
        }
        tree.layers.push_back(parents);
        current = parents;
    }

    return tree;
}

}  // namespace urag::strategies
