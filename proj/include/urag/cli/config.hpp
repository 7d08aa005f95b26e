#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "urag/eval/protocol.hpp"
#include "urag/providers/provider.hpp"
#include "urag/strategies/config.hpp"

namespace urag::cli {

struct ProviderSettings {
    std::string chat_url;
    std::string chat_model = "default";
    std::string embed_url;
    std::string embed_model = "default";
    std::string nli_url;
    std::string api_key;
    int concurrency = 8;
    bool nli_over_chat = false;
};

struct CliConfig {
    std::string dataset;
    std::string corpus;
    std::string strategy = "naive";
    strategies::StrategyConfig strategy_config;
    std::string protocol = "normal";
    eval::ProtocolSpec protocol_spec;
    double alpha = 0.1;
    double calibration_fraction = 0.5;
    std::uint64_t seed = 0;
    std::string out = "out";
    std::string mock_script;
    std::string prompts_dir;
    std::string calibration_models;  // reuse persisted thresholds from this dir
    ProviderSettings providers;
    double cr_floor = 0.0;
    bool force_nonempty = false;
    bool one_hot_fallback = false;
    bool wrong_aware_swap_second = false;
};

CliConfig config_from_json(const nlohmann::json& j);
CliConfig load_config_file(const std::string& path);

// URAGC_CHAT_URL, URAGC_EMBED_URL, URAGC_NLI_URL, URAGC_API_KEY
void apply_env_overrides(CliConfig& config);

// Throws UsageError naming the offending field path. needs_* narrow the
// provider checks to what the command actually uses.
void validate_config(const CliConfig& config, bool needs_embedder, bool needs_nli);

nlohmann::ordered_json config_to_json(const CliConfig& config);
std::string config_hash(const CliConfig& config);

providers::Providers build_providers(const CliConfig& config);

}  // namespace urag::cli
