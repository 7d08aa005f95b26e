#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "urag/core/errors.hpp"
#include "urag/core/numeric.hpp"
#include "urag/core/text.hpp"

namespace urag::core {

// One multiple-choice question bound to a retrieval corpus.
struct McqaInstance {
    std::string id;
    std::string question;
    std::vector<std::string> options;  // K >= 2, pairwise distinct after ws-normalization
    std::size_t answer_index = 0;
    std::string corpus_ref;
    std::vector<std::string> tags;

    std::size_t option_count() const { return options.size(); }

    void validate() const {
        if (id.empty()) throw IntegrityError("instance id empty");
        if (options.size() < 2)
            throw IntegrityError("instance '" + id + "': needs at least 2 options");
        if (answer_index >= options.size())
            throw IntegrityError("instance '" + id + "': answer_index " +
                                 std::to_string(answer_index) + " out of range for " +
                                 std::to_string(options.size()) + " options");
        std::set<std::string> seen;
        for (const auto& opt : options) {
            if (!seen.insert(normalize_ws(opt)).second)
                throw IntegrityError("instance '" + id + "': duplicate option text '" + opt + "'");
        }
    }
};

struct Document {
    std::string id;
    std::optional<std::string> title;
    std::string body;
    std::optional<std::vector<double>> embedding;  // unit-norm when present

    void validate() const {
        if (id.empty()) throw IntegrityError("document id empty");
        if (body.empty()) throw IntegrityError("document '" + id + "': empty body");
        if (embedding) {
            double n = l2_norm(*embedding);
            if (std::abs(n - 1.0) > 1e-6)
                throw IntegrityError("document '" + id + "': embedding norm " +
                                     std::to_string(n) + " is not unit");
        }
    }
};

// Normalized probability vector over a question's options.
struct OptionDistribution {
    std::vector<double> probs;

    OptionDistribution() = default;
    explicit OptionDistribution(std::vector<double> p) : probs(std::move(p)) { validate(); }

    std::size_t size() const { return probs.size(); }
    double operator[](std::size_t i) const { return probs[i]; }

    void validate() const {
        if (probs.empty()) throw IntegrityError("distribution: empty");
        double sum = 0.0;
        for (double p : probs) {
            if (p < -1e-12 || p > 1.0 + 1e-12)
                throw IntegrityError("distribution: entry " + std::to_string(p) +
                                     " outside [0,1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw IntegrityError("distribution: sum " + std::to_string(sum) + " != 1");
    }
};

enum class ScoreMethod { LAC, APS };

inline const char* score_method_name(ScoreMethod m) {
    return m == ScoreMethod::LAC ? "LAC" : "APS";
}

// Subset of option indices produced under a calibrated threshold.
struct PredictionSet {
    ScoreMethod method = ScoreMethod::LAC;
    double threshold = 0.0;            // +inf when the quantile rank overflowed
    std::vector<std::size_t> members;  // sorted ascending

    bool contains(std::size_t c) const {
        return std::binary_search(members.begin(), members.end(), c);
    }
    std::size_t size() const { return members.size(); }
};

struct SplitSpec {
    std::vector<std::string> calibration_ids;
    std::vector<std::string> test_ids;
    std::uint64_t seed = 0;
};

struct TraceStep {
    std::string query;   // retrieval query text; empty for non-retrieval steps
    std::string action;  // "score", "search", "fuse", "draft", ...
    std::vector<std::string> retrieved_ids;
    std::string prompt;
    std::string completion;
};

// Full record of one strategy run over one instance.
struct StrategyTrace {
    std::string instance_id;
    std::string strategy;
    std::vector<TraceStep> steps;
    OptionDistribution final_distribution;
    std::vector<std::string> flags;  // quality degradations; excluded from headline metrics
    std::vector<std::string> notes;  // informational markers (truncation, injections)

    void add_flag(const std::string& f) { flags.push_back(f); }
    void add_note(const std::string& n) { notes.push_back(n); }
};

}  // namespace urag::core
