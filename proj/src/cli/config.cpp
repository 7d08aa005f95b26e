#include "urag/cli/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "urag/core/rng.hpp"
#include "urag/providers/http.hpp"
#include "urag/providers/mock.hpp"

namespace urag::cli {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

CliConfig config_from_json(const json& j) {
    CliConfig c;
    c.dataset = j.value("dataset", c.dataset);
    c.corpus = j.value("corpus", c.corpus);
    c.strategy = j.value("strategy", c.strategy);
    c.protocol = j.value("protocol", c.protocol);
    c.alpha = j.value("alpha", c.alpha);
    c.calibration_fraction = j.value("calibration_fraction", c.calibration_fraction);
    c.seed = j.value("seed", c.seed);
    c.out = j.value("out", c.out);
    c.mock_script = j.value("mock_script", c.mock_script);
    c.prompts_dir = j.value("prompts_dir", c.prompts_dir);
    c.calibration_models = j.value("calibration_models", c.calibration_models);
    c.cr_floor = j.value("cr_floor", c.cr_floor);
    c.force_nonempty = j.value("force_nonempty", c.force_nonempty);
    c.one_hot_fallback = j.value("one_hot_fallback", c.one_hot_fallback);
    c.wrong_aware_swap_second = j.value("wrong_aware_swap_second", c.wrong_aware_swap_second);

    if (j.contains("strategy_config")) {
        const auto& s = j["strategy_config"];
        auto& sc = c.strategy_config;
        sc.retrieval_depth = s.value("k", sc.retrieval_depth);
        sc.max_context_tokens = s.value("max_context_tokens", sc.max_context_tokens);
        sc.iterations = s.value("iterations", sc.iterations);
        sc.query_count = s.value("query_count", sc.query_count);
        sc.fusion_smoothing_k = s.value("fusion_smoothing_k", sc.fusion_smoothing_k);
        sc.fusion_temperature = s.value("fusion_temperature", sc.fusion_temperature);
        sc.selfrag_depth = s.value("selfrag_depth", sc.selfrag_depth);
        sc.temperature = s.value("temperature", sc.temperature);
        if (s.contains("selfrag_weights")) {
            auto w = s["selfrag_weights"].get<std::vector<double>>();
            if (w.size() != 3)
                throw core::UsageError("strategy_config.selfrag_weights", "need 3 weights");
            sc.selfrag_weights = {w[0], w[1], w[2]};
        }
        if (s.contains("raptor")) {
            const auto& r = s["raptor"];
            sc.raptor.chunk_tokens = r.value("chunk_tokens", sc.raptor.chunk_tokens);
            sc.raptor.max_depth = r.value("max_depth", sc.raptor.max_depth);
            sc.raptor.responsibility_threshold =
                r.value("responsibility_threshold", sc.raptor.responsibility_threshold);
            sc.raptor.max_clusters = r.value("max_clusters", sc.raptor.max_clusters);
            sc.raptor.reducer = r.value("reducer", sc.raptor.reducer);
        }
    }
    if (j.contains("protocol_spec")) {
        const auto& p = j["protocol_spec"];
        c.protocol_spec.injected_count =
            p.value("injected_count", c.protocol_spec.injected_count);
        c.protocol_spec.fresh_per_step = p.value("fresh_per_step", c.protocol_spec.fresh_per_step);
        if (p.contains("k_list"))
            c.protocol_spec.k_list = p["k_list"].get<std::vector<std::size_t>>();
        if (p.contains("base")) c.protocol_spec.base = eval::parse_protocol(p["base"].get<std::string>());
    }
    if (j.contains("providers")) {
        const auto& p = j["providers"];
        c.providers.chat_url = p.value("chat_url", c.providers.chat_url);
        c.providers.chat_model = p.value("chat_model", c.providers.chat_model);
        c.providers.embed_url = p.value("embed_url", c.providers.embed_url);
        c.providers.embed_model = p.value("embed_model", c.providers.embed_model);
        c.providers.nli_url = p.value("nli_url", c.providers.nli_url);
        c.providers.api_key = p.value("api_key", c.providers.api_key);
        c.providers.concurrency = p.value("concurrency", c.providers.concurrency);
        c.providers.nli_over_chat = p.value("nli_over_chat", c.providers.nli_over_chat);
    }
    return c;
}

CliConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw core::UsageError("config", "cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw core::UsageError("config", std::string("malformed config file: ") + e.what());
    }
    return config_from_json(j);
}

void apply_env_overrides(CliConfig& config) {
    auto env = [](const char* name) -> std::string {
        const char* v = std::getenv(name);
        return v ? v : "";
    };
    if (auto v = env("URAGC_CHAT_URL"); !v.empty()) config.providers.chat_url = v;
    if (auto v = env("URAGC_EMBED_URL"); !v.empty()) config.providers.embed_url = v;
    if (auto v = env("URAGC_NLI_URL"); !v.empty()) config.providers.nli_url = v;
    if (auto v = env("URAGC_API_KEY"); !v.empty()) config.providers.api_key = v;
}

void validate_config(const CliConfig& config, bool needs_embedder, bool needs_nli) {
    if (!(config.alpha > 0.0 && config.alpha < 1.0))
        throw core::UsageError("alpha", "must lie in (0,1), got " + std::to_string(config.alpha));
    if (!(config.calibration_fraction > 0.0 && config.calibration_fraction < 1.0))
        throw core::UsageError("calibration_fraction", "must lie in (0,1)");
    if (config.cr_floor < 0.0 || config.cr_floor >= 1.0)
        throw core::UsageError("cr_floor", "must lie in [0,1)");

    strategies::parse_strategy(config.strategy);
    config.strategy_config.validate();

    const bool mock = !config.mock_script.empty();
    if (mock && !config.providers.chat_url.empty())
        throw core::UsageError("providers.chat_url",
                               "configure exactly one of a live endpoint or a mock script");
    if (!mock && config.providers.chat_url.empty())
        throw core::UsageError("providers.chat_url",
                               "configure exactly one of a live endpoint or a mock script");
    if (mock && !config.providers.embed_url.empty())
        throw core::UsageError("providers.embed_url",
                               "configure exactly one of a live endpoint or a mock script");
    if (needs_embedder && !mock && config.providers.embed_url.empty())
        throw core::UsageError("providers.embed_url",
                               "configure exactly one of a live endpoint or a mock script");
    if (mock && !config.providers.nli_url.empty())
        throw core::UsageError("providers.nli_url",
                               "configure exactly one of a live endpoint or a mock script");
    if (needs_nli && !mock && config.providers.nli_url.empty() && !config.providers.nli_over_chat)
        throw core::UsageError("providers.nli_url",
                               "configure a classifier endpoint, nli_over_chat, or a mock script");
}

ordered config_to_json(const CliConfig& c) {
    ordered j;
    j["dataset"] = c.dataset;
    j["corpus"] = c.corpus;
    j["strategy"] = c.strategy;
    ordered sc;
    sc["k"] = c.strategy_config.retrieval_depth;
    sc["max_context_tokens"] = c.strategy_config.max_context_tokens;
    sc["iterations"] = c.strategy_config.iterations;
    sc["query_count"] = c.strategy_config.query_count;
    sc["fusion_smoothing_k"] = c.strategy_config.fusion_smoothing_k;
    sc["fusion_temperature"] = c.strategy_config.fusion_temperature;
    sc["selfrag_weights"] = {c.strategy_config.selfrag_weights.rel,
                             c.strategy_config.selfrag_weights.sup,
                             c.strategy_config.selfrag_weights.use};
    sc["selfrag_depth"] = c.strategy_config.selfrag_depth;
    ordered rp;
    rp["chunk_tokens"] = c.strategy_config.raptor.chunk_tokens;
    rp["max_depth"] = c.strategy_config.raptor.max_depth;
    rp["responsibility_threshold"] = c.strategy_config.raptor.responsibility_threshold;
    rp["max_clusters"] = c.strategy_config.raptor.max_clusters;
    rp["reducer"] = c.strategy_config.raptor.reducer;
    sc["raptor"] = std::move(rp);
    sc["temperature"] = c.strategy_config.temperature;
    j["strategy_config"] = std::move(sc);
    j["protocol"] = c.protocol;
    ordered ps;
    ps["injected_count"] = c.protocol_spec.injected_count;
    ps["fresh_per_step"] = c.protocol_spec.fresh_per_step;
    ps["k_list"] = c.protocol_spec.k_list;
    ps["base"] = eval::protocol_name(c.protocol_spec.base);
    j["protocol_spec"] = std::move(ps);
    j["alpha"] = c.alpha;
    j["calibration_fraction"] = c.calibration_fraction;
    j["seed"] = c.seed;
    j["out"] = c.out;
    j["mock_script"] = c.mock_script;
    j["prompts_dir"] = c.prompts_dir;
    j["calibration_models"] = c.calibration_models;
    ordered pv;
    pv["chat_url"] = c.providers.chat_url;
    pv["chat_model"] = c.providers.chat_model;
    pv["embed_url"] = c.providers.embed_url;
    pv["embed_model"] = c.providers.embed_model;
    pv["nli_url"] = c.providers.nli_url;
    pv["api_key"] = c.providers.api_key.empty() ? "" : "<set>";  // keys stay out of artifacts
    pv["concurrency"] = c.providers.concurrency;
    pv["nli_over_chat"] = c.providers.nli_over_chat;
    j["providers"] = std::move(pv);
    j["cr_floor"] = c.cr_floor;
    j["force_nonempty"] = c.force_nonempty;
    j["one_hot_fallback"] = c.one_hot_fallback;
    j["wrong_aware_swap_second"] = c.wrong_aware_swap_second;
    return j;
}

std::string config_hash(const CliConfig& config) {
    std::uint64_t h = core::fnv1a(config_to_json(config).dump());
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

providers::Providers build_providers(const CliConfig& config) {
    providers::Providers p;
    if (!config.mock_script.empty()) {
        auto script = std::make_shared<const providers::MockScript>(
            providers::MockScript::load(config.mock_script));
        return providers::make_mock_providers(script);
    }
    if (!config.providers.chat_url.empty()) {
        providers::HttpEndpoint endpoint;
        endpoint.base_url = config.providers.chat_url;
        endpoint.path = "/v1/chat/completions";
        endpoint.model = config.providers.chat_model;
        endpoint.api_key = config.providers.api_key;
        endpoint.concurrency = config.providers.concurrency;
        p.chat = std::make_shared<providers::HttpChatProvider>(endpoint);
    }
    if (!config.providers.embed_url.empty()) {
        providers::HttpEndpoint endpoint;
        endpoint.base_url = config.providers.embed_url;
        endpoint.path = "/v1/embeddings";
        endpoint.model = config.providers.embed_model;
        endpoint.api_key = config.providers.api_key;
        endpoint.concurrency = config.providers.concurrency;
        p.embedder = std::make_shared<providers::HttpEmbedProvider>(endpoint);
    }
    if (!config.providers.nli_url.empty()) {
        providers::HttpEndpoint endpoint;
        endpoint.base_url = config.providers.nli_url;
        endpoint.path = "/v1/nli";
        endpoint.api_key = config.providers.api_key;
        endpoint.concurrency = config.providers.concurrency;
        p.nli = std::make_shared<providers::HttpNliProvider>(endpoint);
    } else if (config.providers.nli_over_chat && p.chat) {
        p.nli = std::make_shared<providers::NliOverChatProvider>(p.chat);
    }
    return p;
}

}  // namespace urag::cli
