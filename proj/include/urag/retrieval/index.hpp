#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "urag/core/types.hpp"
#include "urag/providers/provider.hpp"

namespace urag::retrieval {

struct IndexEntry {
    std::string doc_id;
    std::vector<double> vector;  // unit-norm
};

// Exact full-scan cosine index; corpora at desk scale stay small.
struct VectorIndex {
    std::string corpus_ref;
    std::vector<IndexEntry> entries;
    std::size_t dimension = 0;

    std::size_t size() const { return entries.size(); }
};

struct Ranking {
    std::vector<std::string> doc_ids;  // rank 0 = best
    std::string query;
};

struct ScoredHit {
    std::string doc_id;
    double score = 0.0;
};

VectorIndex build_index(const std::vector<core::Document>& corpus,
                        providers::EmbedProvider& embedder, const std::string& corpus_ref = "");

// Top-min(k, n) by descending dot product; ties break lexicographically by id.
Ranking search(const VectorIndex& index, const std::vector<double>& query_vector, std::size_t k);
std::vector<ScoredHit> search_scored(const VectorIndex& index,
                                     const std::vector<double>& query_vector, std::size_t k);

// Reciprocal rank fusion with 0-based ranks: score(d) = sum 1/(k + r_i(d) + 1)
// over the rankings containing d; descending score, ties by doc id.
Ranking rrf_fuse(const std::vector<Ranking>& rankings, std::size_t smoothing_k = 60);

// Uniform seed-deterministic sample without replacement from corpus \ exclude.
std::vector<std::string> sample_irrelevant(const VectorIndex& index,
                                           const std::unordered_set<std::string>& exclude,
                                           std::size_t count, std::uint64_t seed);

// Cache file: little-endian float32 vectors keyed by doc id, header with
// dimension; avoids re-embedding across runs.
void save_index(const VectorIndex& index, const std::string& path);
VectorIndex load_index(const std::string& path);

}  // namespace urag::retrieval
