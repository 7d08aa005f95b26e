#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "urag/providers/provider.hpp"

namespace urag::providers {

// Fully deterministic scripted backends. Responses are resolved by, in order:
// a keyed lookup on a marker embedded in the prompt, ordered substring rules,
// then a hash-derived default. Identical requests always resolve identically;
// fail_times models transport flakiness without changing response content.
struct MockChatRule {
    std::string contains;                       // empty matches everything
    std::string text;                           // completion; default "Answer|<argmax>"
    std::map<std::string, double> label_logprobs;  // letter -> logit (shifted to <= 0)
    std::vector<double> probs;                  // alternative: probabilities, logged
    int fail_times = 0;                         // transport failures before success
};

struct MockEmbedRule {
    std::string equals;    // exact text match (checked first)
    std::string contains;  // substring match
    std::vector<double> vector;
};

struct MockNliRule {
    std::string contains;  // matched against premise + "\n" + hypothesis
    double entail = 0.0;
    double neutral = 0.0;
    double contradict = 0.0;
};

struct MockScript {
    std::size_t embed_dimension = 8;
    std::string keyed_marker_prefix = "[qid:";
    std::string keyed_marker_suffix = "]";
    std::unordered_map<std::string, MockChatRule> hashed_chat;  // request_hash -> rule
    std::unordered_map<std::string, MockChatRule> keyed_chat;
    std::vector<MockChatRule> chat_rules;
    MockChatRule chat_default;  // hash logits when no label_logprobs/probs given
    std::vector<MockEmbedRule> embed_rules;
    std::vector<MockNliRule> nli_rules;
    MockNliRule nli_default{"", 0.2, 0.6, 0.2};

    static MockScript from_json(const nlohmann::json& j);
    static MockScript load(const std::string& path);
    nlohmann::ordered_json to_json() const;
    void save(const std::string& path) const;
};

class MockChatProvider : public ChatProvider {
public:
    explicit MockChatProvider(std::shared_ptr<const MockScript> script)
        : script_(std::move(script)) {}

    ChatResult chat(const ChatRequest& request) override;
    std::string identity() const override { return "mock-chat"; }

private:
    std::shared_ptr<const MockScript> script_;
    std::mutex mutex_;
    std::unordered_map<const MockChatRule*, int> failures_served_;

    const MockChatRule* resolve(const std::string& flattened) const;
};

class MockEmbedProvider : public EmbedProvider {
public:
    explicit MockEmbedProvider(std::shared_ptr<const MockScript> script)
        : script_(std::move(script)) {}
    std::string identity() const override { return "mock-embed"; }

protected:
    std::vector<std::vector<double>> embed_raw(const std::vector<std::string>& texts) override;

private:
    std::shared_ptr<const MockScript> script_;
};

class MockNliProvider : public NliProvider {
public:
    explicit MockNliProvider(std::shared_ptr<const MockScript> script)
        : script_(std::move(script)) {}
    std::string identity() const override { return "mock-nli"; }

protected:
    NliVerdict nli_raw(const std::string& premise, const std::string& hypothesis) override;

private:
    std::shared_ptr<const MockScript> script_;
};

Providers make_mock_providers(std::shared_ptr<const MockScript> script);

// Stable hex digest of a request body; the key the hashed_chat section uses.
std::string request_hash(const ChatRequest& request);

// Deterministic unit-direction vector derived from text content alone.
std::vector<double> hash_embedding(const std::string& text, std::size_t dimension);

}  // namespace urag::providers
