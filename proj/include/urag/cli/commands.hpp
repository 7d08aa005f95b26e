#pragma once

#include <string>
#include <vector>

#include "urag/cli/config.hpp"
#include "urag/cli/synth.hpp"
#include "urag/forge/forge.hpp"

namespace urag::cli {

// Exit codes: 0 success, 1 error, 2 embedded invariant failure.
constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInvariant = 2;

int cmd_run(const CliConfig& config);
int cmd_calibrate(const CliConfig& config);

struct ForgeArgs {
    CliConfig config;
    std::string seeds_path;  // JSONL: {id, question, answer, context?}
    forge::ForgeConfig forge;
};
int cmd_forge(const ForgeArgs& args);

int cmd_report(const std::vector<std::string>& report_dirs, const std::string& out_dir);

int cmd_synth(const SynthParams& params, const std::string& out_dir);

int cmd_prompts_export(const std::string& dir);

}  // namespace urag::cli
