#include "urag/providers/mock.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "urag/core/numeric.hpp"
#include "urag/core/rng.hpp"
#include "urag/core/text.hpp"

namespace urag::providers {

using nlohmann::json;

namespace {

MockChatRule chat_rule_from_json(const json& j) {
    MockChatRule rule;
    if (j.contains("contains")) rule.contains = j["contains"].get<std::string>();
    if (j.contains("text")) rule.text = j["text"].get<std::string>();
    if (j.contains("label_logprobs")) {
        for (auto it = j["label_logprobs"].begin(); it != j["label_logprobs"].end(); ++it) {
            rule.label_logprobs[it.key()] = it.value().get<double>();
        }
    }
    if (j.contains("probs")) rule.probs = j["probs"].get<std::vector<double>>();
    if (j.contains("fail_times")) rule.fail_times = j["fail_times"].get<int>();
    return rule;
}

// Label logits for this rule, shifted to proper (<= 0) logprobs. Softmax is
// shift-invariant, so scripted logits survive unchanged.
std::vector<std::pair<std::string, double>> rule_label_logits(const MockChatRule& rule,
                                                              const std::string& flattened,
                                                              int top_n) {
    std::vector<std::pair<std::string, double>> out;
    if (!rule.label_logprobs.empty()) {
        for (const auto& [letter, logit] : rule.label_logprobs) out.emplace_back(letter, logit);
    } else if (!rule.probs.empty()) {
        for (std::size_t i = 0; i < rule.probs.size(); ++i) {
            double p = std::max(rule.probs[i], 1e-300);
            out.emplace_back(core::option_label(i), std::log(p));
        }
    } else {
        // Hash-derived pseudo-random logits: stable across runs, varied across prompts.
        for (int i = 0; i < top_n; ++i) {
            std::string letter = core::option_label(static_cast<std::size_t>(i));
            std::uint64_t h = core::fnv1a(letter, core::fnv1a(flattened));
            double u = static_cast<double>(h >> 11) * 0x1.0p-53;
            out.emplace_back(letter, -4.0 * u);
        }
    }
    double max_logit = out.front().second;
    for (const auto& [_, l] : out) max_logit = std::max(max_logit, l);
    for (auto& [_, l] : out) l -= max_logit;
    return out;
}

}  // namespace

MockScript MockScript::from_json(const json& j) {
    MockScript script;
    if (j.contains("embed_dimension")) script.embed_dimension = j["embed_dimension"].get<std::size_t>();
    if (j.contains("chat_default")) script.chat_default = chat_rule_from_json(j["chat_default"]);
    if (j.contains("chat_rules")) {
        for (const auto& r : j["chat_rules"]) script.chat_rules.push_back(chat_rule_from_json(r));
    }
    if (j.contains("keyed_chat")) {
        const auto& k = j["keyed_chat"];
        if (k.contains("marker_prefix")) script.keyed_marker_prefix = k["marker_prefix"].get<std::string>();
        if (k.contains("marker_suffix")) script.keyed_marker_suffix = k["marker_suffix"].get<std::string>();
        if (k.contains("entries")) {
            for (auto it = k["entries"].begin(); it != k["entries"].end(); ++it) {
                script.keyed_chat[it.key()] = chat_rule_from_json(it.value());
            }
        }
    }
    if (j.contains("hashed_chat")) {
        for (auto it = j["hashed_chat"].begin(); it != j["hashed_chat"].end(); ++it) {
            script.hashed_chat[it.key()] = chat_rule_from_json(it.value());
        }
    }
    if (j.contains("embed_rules")) {
        for (const auto& r : j["embed_rules"]) {
            MockEmbedRule rule;
            if (r.contains("equals")) rule.equals = r["equals"].get<std::string>();
            if (r.contains("contains")) rule.contains = r["contains"].get<std::string>();
            rule.vector = r["vector"].get<std::vector<double>>();
            script.embed_rules.push_back(std::move(rule));
        }
    }
    auto nli_rule = [](const json& r) {
        MockNliRule rule;
        if (r.contains("contains")) rule.contains = r["contains"].get<std::string>();
        rule.entail = r.value("entail", 0.0);
        rule.neutral = r.value("neutral", 0.0);
        rule.contradict = r.value("contradict", 0.0);
        return rule;
    };
    if (j.contains("nli_rules")) {
        for (const auto& r : j["nli_rules"]) script.nli_rules.push_back(nli_rule(r));
    }
    if (j.contains("nli_default")) script.nli_default = nli_rule(j["nli_default"]);
    return script;
}

nlohmann::ordered_json MockScript::to_json() const {
    using ordered = nlohmann::ordered_json;
    auto rule_json = [](const MockChatRule& rule) {
        ordered j;
        if (!rule.contains.empty()) j["contains"] = rule.contains;
        if (!rule.text.empty()) j["text"] = rule.text;
        if (!rule.label_logprobs.empty()) j["label_logprobs"] = rule.label_logprobs;
        if (!rule.probs.empty()) j["probs"] = rule.probs;
        if (rule.fail_times > 0) j["fail_times"] = rule.fail_times;
        return j;
    };
    ordered j;
    j["embed_dimension"] = embed_dimension;
    j["chat_default"] = rule_json(chat_default);
    ordered rules = ordered::array();
    for (const auto& r : chat_rules) rules.push_back(rule_json(r));
    j["chat_rules"] = std::move(rules);
    ordered keyed;
    keyed["marker_prefix"] = keyed_marker_prefix;
    keyed["marker_suffix"] = keyed_marker_suffix;
    ordered entries;
    {
        // stable key order for byte-identical files
        std::vector<std::string> keys;
        keys.reserve(keyed_chat.size());
        for (const auto& [k, _] : keyed_chat) keys.push_back(k);
        std::sort(keys.begin(), keys.end());
        for (const auto& k : keys) entries[k] = rule_json(keyed_chat.at(k));
    }
    keyed["entries"] = std::move(entries);
    j["keyed_chat"] = std::move(keyed);
    ordered embeds = ordered::array();
    for (const auto& r : embed_rules) {
        ordered e;
        if (!r.equals.empty()) e["equals"] = r.equals;
        if (!r.contains.empty()) e["contains"] = r.contains;
        e["vector"] = r.vector;
        embeds.push_back(std::move(e));
    }
    j["embed_rules"] = std::move(embeds);
    ordered nlis = ordered::array();
    for (const auto& r : nli_rules) {
        nlis.push_back(ordered{{"contains", r.contains},
                               {"entail", r.entail},
                               {"neutral", r.neutral},
                               {"contradict", r.contradict}});
    }
    j["nli_rules"] = std::move(nlis);
    j["nli_default"] = ordered{{"entail", nli_default.entail},
                               {"neutral", nli_default.neutral},
                               {"contradict", nli_default.contradict}};
    return j;
}

void MockScript::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw core::ArgumentError("cannot write mock script: " + path);
    out << to_json().dump(2) << '\n';
}

MockScript MockScript::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw core::ArgumentError("cannot open mock script: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw core::ParseError(std::string("mock script: ") + e.what(), 0);
    }
    return from_json(j);
}

std::string request_hash(const ChatRequest& request) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(core::fnv1a(request.flattened())));
    return buf;
}

const MockChatRule* MockChatProvider::resolve(const std::string& flattened) const {
    const auto& s = *script_;
    if (!s.hashed_chat.empty()) {
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(core::fnv1a(flattened)));
        auto it = s.hashed_chat.find(buf);
        if (it != s.hashed_chat.end()) return &it->second;
    }
    if (!s.keyed_chat.empty()) {
        auto start = flattened.find(s.keyed_marker_prefix);
        if (start != std::string::npos) {
            start += s.keyed_marker_prefix.size();
            auto end = flattened.find(s.keyed_marker_suffix, start);
            if (end != std::string::npos) {
                auto it = s.keyed_chat.find(flattened.substr(start, end - start));
                if (it != s.keyed_chat.end()) return &it->second;
            }
        }
    }
    for (const auto& rule : s.chat_rules) {
        if (rule.contains.empty() || core::contains(flattened, rule.contains)) return &rule;
    }
    return &s.chat_default;
}

ChatResult MockChatProvider::chat(const ChatRequest& request) {
    request.validate();
    std::string flattened = request.flattened();
    const MockChatRule* rule = resolve(flattened);

    if (rule->fail_times > 0) {
        std::lock_guard<std::mutex> lock(mutex_);
        int& served = failures_served_[rule];
        if (served < rule->fail_times) {
            ++served;
            throw core::ProviderError("mock: scripted transport failure", 429, true);
        }
    }

    ChatResult result;
    if (request.want_logprobs) {
        auto logits = rule_label_logits(*rule, flattened, request.logprob_top_n);
        std::stable_sort(logits.begin(), logits.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        TokenLogprobs lp;
        lp.positions.emplace_back();
        for (std::size_t i = 0; i < logits.size() &&
                                i < static_cast<std::size_t>(request.logprob_top_n);
             ++i) {
            lp.positions.back().push_back({logits[i].first, logits[i].second});
        }
        lp.validate();
        result.logprobs = std::move(lp);
        result.text = rule->text.empty() ? "Answer|" + logits.front().first : rule->text;
    } else {
        result.text = rule->text;
        if (result.text.empty()) result.text = "Answer|A";
    }
    // "{hash}" lets one rule produce distinct deterministic texts per prompt
    auto pos = result.text.find("{hash}");
    if (pos != std::string::npos) {
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(core::fnv1a(flattened)));
        result.text.replace(pos, 6, buf);
    }
    return result;
}

std::vector<double> hash_embedding(const std::string& text, std::size_t dimension) {
    std::vector<double> v(dimension);
    std::uint64_t base = core::fnv1a(text);
    for (std::size_t i = 0; i < dimension; ++i) {
        std::uint64_t h = core::mix_seed(base, i + 1);
        v[i] = static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;  // [-1, 1)
    }
    if (core::l2_norm(v) < 1e-9) v[0] = 1.0;
    return v;
}

std::vector<std::vector<double>> MockEmbedProvider::embed_raw(
    const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        const MockEmbedRule* match = nullptr;
        for (const auto& rule : script_->embed_rules) {
            if (!rule.equals.empty() && rule.equals == text) {
                match = &rule;
                break;
            }
            if (!match && !rule.contains.empty() && core::contains(text, rule.contains)) {
                match = &rule;
            }
        }
        out.push_back(match ? match->vector : hash_embedding(text, script_->embed_dimension));
    }
    return out;
}

NliVerdict MockNliProvider::nli_raw(const std::string& premise, const std::string& hypothesis) {
    std::string joined = premise + "\n" + hypothesis;
    const MockNliRule* match = &script_->nli_default;
    for (const auto& rule : script_->nli_rules) {
        if (!rule.contains.empty() && core::contains(joined, rule.contains)) {
            match = &rule;
            break;
        }
    }
    NliVerdict v;
    v.entail = match->entail;
    v.neutral = match->neutral;
    v.contradict = match->contradict;
    return v;
}

Providers make_mock_providers(std::shared_ptr<const MockScript> script) {
    Providers p;
    p.chat = std::make_shared<MockChatProvider>(script);
    p.embedder = std::make_shared<MockEmbedProvider>(script);
    p.nli = std::make_shared<MockNliProvider>(script);
    return p;
}

}  // namespace urag::providers
