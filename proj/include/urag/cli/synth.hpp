#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "urag/core/types.hpp"
#include "urag/providers/mock.hpp"

namespace urag::cli {

// Synthetic exchangeable world: gold labels are drawn from the per-instance
// distributions, and the mock script replays exactly those distributions, so
// split-conformal coverage is testable at desk scale.
struct SynthParams {
    std::size_t instance_count = 11000;
    std::size_t option_count = 4;
    double concentration = 1.0;  // symmetric Dirichlet over option probabilities
    std::uint64_t seed = 1;

    void validate() const;
};

struct SynthWorld {
    std::vector<core::McqaInstance> dataset;
    std::vector<core::Document> corpus;
    providers::MockScript script;
};

SynthWorld make_synth_world(const SynthParams& params);

void write_synth_world(const SynthWorld& world, const std::string& dataset_path,
                       const std::string& corpus_path, const std::string& mock_path);

}  // namespace urag::cli
