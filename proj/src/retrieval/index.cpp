#include "urag/retrieval/index.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <unordered_map>

#include "urag/core/numeric.hpp"
#include "urag/core/rng.hpp"

namespace urag::retrieval {

VectorIndex build_index(const std::vector<core::Document>& corpus,
                        providers::EmbedProvider& embedder, const std::string& corpus_ref) {
    if (corpus.empty()) throw core::ArgumentError("build_index: empty corpus");

    std::unordered_set<std::string> seen;
    std::vector<std::string> bodies;
    bodies.reserve(corpus.size());
    for (const auto& doc : corpus) {
        doc.validate();
        if (!seen.insert(doc.id).second)
            throw core::IntegrityError("build_index: duplicate doc id '" + doc.id + "'");
        bodies.push_back(doc.body);
    }

    std::vector<std::vector<double>> vectors;
    try {
        vectors = embedder.embed(bodies);
    } catch (const core::ProviderError& e) {
        throw core::ProviderError(std::string("build_index: embedding corpus failed: ") +
                                      e.what(),
                                  e.status(), e.retryable());
    }

    VectorIndex index;
    index.corpus_ref = corpus_ref;
    index.dimension = vectors.front().size();
    index.entries.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        index.entries.push_back({corpus[i].id, std::move(vectors[i])});
    }
    return index;
}

std::vector<ScoredHit> search_scored(const VectorIndex& index,
                                     const std::vector<double>& query_vector, std::size_t k) {
    if (k < 1) throw core::ArgumentError("search: k must be >= 1");
    if (query_vector.size() != index.dimension)
        throw core::ArgumentError("search: query dimension " +
                                  std::to_string(query_vector.size()) + " != index dimension " +
                                  std::to_string(index.dimension));

    std::vector<ScoredHit> hits;
    hits.reserve(index.size());
    for (const auto& entry : index.entries) {
        hits.push_back({entry.doc_id, core::dot(entry.vector, query_vector)});
    }
    std::sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

Ranking search(const VectorIndex& index, const std::vector<double>& query_vector, std::size_t k) {
    Ranking ranking;
    for (auto& hit : search_scored(index, query_vector, k)) {
        ranking.doc_ids.push_back(std::move(hit.doc_id));
    }
    return ranking;
}

Ranking rrf_fuse(const std::vector<Ranking>& rankings, std::size_t smoothing_k) {
    if (rankings.empty()) throw core::ArgumentError("rrf_fuse: no rankings");
    // terms are summed in sorted order so the fused score does not depend on
    // the order the rankings were supplied in
    std::map<std::string, std::vector<double>> terms;
    for (const auto& ranking : rankings) {
        std::unordered_set<std::string> within;
        for (std::size_t rank = 0; rank < ranking.doc_ids.size(); ++rank) {
            const auto& id = ranking.doc_ids[rank];
            if (!within.insert(id).second)
                throw core::IntegrityError("rrf_fuse: duplicate doc id '" + id +
                                           "' within one ranking");
            terms[id].push_back(1.0 / static_cast<double>(smoothing_k + rank + 1));
        }
    }
    std::vector<std::pair<std::string, double>> ordered;
    ordered.reserve(terms.size());
    for (auto& [id, t] : terms) {
        std::sort(t.begin(), t.end());
        double score = 0.0;
        for (double v : t) score += v;
        ordered.emplace_back(id, score);
    }
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    Ranking fused;
    for (auto& [id, _] : ordered) fused.doc_ids.push_back(id);
    return fused;
}

std::vector<std::string> sample_irrelevant(const VectorIndex& index,
                                           const std::unordered_set<std::string>& exclude,
                                           std::size_t count, std::uint64_t seed) {
    std::vector<std::string> pool;
    pool.reserve(index.size());
    for (const auto& entry : index.entries) {
        if (!exclude.count(entry.doc_id)) pool.push_back(entry.doc_id);
    }
    if (count > pool.size())
        throw core::ArgumentError("sample_irrelevant: need " + std::to_string(count) +
                                  " documents but only " + std::to_string(pool.size()) +
                                  " remain outside the excluded set (short by " +
                                  std::to_string(count - pool.size()) + ")");
    core::Rng rng(seed);
    auto picks = core::sample_indices(rng, pool.size(), count);
    std::vector<std::string> out;
    out.reserve(count);
    for (auto i : picks) out.push_back(pool[i]);
    return out;
}

namespace {

constexpr char kMagic[8] = {'U', 'R', 'A', 'G', 'V', 'I', 'D', 'X'};

template <typename T>
void write_pod(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw core::ParseError("truncated index cache", 0);
    return value;
}

void write_string(std::ofstream& out, const std::string& s) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
    auto len = read_pod<std::uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw core::ParseError("truncated index cache", 0);
    return s;
}

}  // namespace

void save_index(const VectorIndex& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw core::ArgumentError("cannot write index cache: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_pod<std::uint32_t>(out, 1);  // version
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(index.dimension));
    write_pod<std::uint64_t>(out, index.entries.size());
    write_string(out, index.corpus_ref);
    for (const auto& entry : index.entries) {
        write_string(out, entry.doc_id);
        for (double v : entry.vector) write_pod<float>(out, static_cast<float>(v));
    }
}

VectorIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw core::ArgumentError("cannot open index cache: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw core::ParseError("not an index cache file: " + path, 0);
    auto version = read_pod<std::uint32_t>(in);
    if (version != 1)
        throw core::ParseError("unsupported index cache version " + std::to_string(version), 0);
    VectorIndex index;
    index.dimension = read_pod<std::uint32_t>(in);
    auto count = read_pod<std::uint64_t>(in);
    index.corpus_ref = read_string(in);
    index.entries.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        IndexEntry entry;
        entry.doc_id = read_string(in);
        entry.vector.resize(index.dimension);
        for (auto& v : entry.vector) v = static_cast<double>(read_pod<float>(in));
        index.entries.push_back(std::move(entry));
    }
    return index;
}

}  // namespace urag::retrieval
