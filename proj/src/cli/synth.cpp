#include "urag/cli/synth.hpp"

#include <cstdio>

#include "urag/core/dataset.hpp"
#include "urag/core/rng.hpp"

namespace urag::cli {

void SynthParams::validate() const {
    if (instance_count < 2) throw core::UsageError("synth.n", "need at least 2 instances");
    if (option_count < 2 || option_count > 26)
        throw core::UsageError("synth.options", "option count must lie in [2,26]");
    if (concentration <= 0.0)
        throw core::UsageError("synth.concentration", "must be positive");
}

SynthWorld make_synth_world(const SynthParams& params) {
    params.validate();
    SynthWorld world;
    core::Rng rng(params.seed);

    char idbuf[32];
    for (std::size_t i = 0; i < params.instance_count; ++i) {
        std::snprintf(idbuf, sizeof(idbuf), "q%06zu", i);
        std::string id = idbuf;

        auto probs = core::dirichlet_sample(rng, params.option_count, params.concentration);
        // gold drawn from the instance's own distribution
        double u = core::uniform01(rng);
        std::size_t gold = params.option_count - 1;
        double acc = 0.0;
        for (std::size_t c = 0; c < params.option_count; ++c) {
            acc += probs[c];
            if (u < acc) {
                gold = c;
                break;
            }
        }

        core::McqaInstance inst;
        inst.id = id;
        inst.question =
            "Synthetic calibration item [qid:" + id + "]: select the scripted answer.";
        for (std::size_t c = 0; c < params.option_count; ++c) {
            inst.options.push_back("Scripted option " + core::option_label(c) + " of " + id);
        }
        inst.answer_index = gold;
        inst.corpus_ref = "synth";
        inst.tags = {"synthetic"};
        inst.validate();
        world.dataset.push_back(std::move(inst));

        providers::MockChatRule rule;
        rule.probs = probs;
        world.script.keyed_chat[id] = std::move(rule);
    }

    std::size_t corpus_size = std::min<std::size_t>(params.instance_count, 32);
    for (std::size_t d = 0; d < corpus_size; ++d) {
        core::Document doc;
        std::snprintf(idbuf, sizeof(idbuf), "synth-d%03zu", d);
        doc.id = idbuf;
        doc.body = "Synthetic corpus passage " + std::to_string(d) +
                   " describing topic " + std::to_string(d % 7) + ".";
        world.corpus.push_back(std::move(doc));
    }
    return world;
}

void write_synth_world(const SynthWorld& world, const std::string& dataset_path,
                       const std::string& corpus_path, const std::string& mock_path) {
    core::save_dataset(dataset_path, world.dataset);
    core::save_corpus(corpus_path, world.corpus);
    world.script.save(mock_path);
}

}  // namespace urag::cli
