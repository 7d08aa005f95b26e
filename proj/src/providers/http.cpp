#include "urag/providers/http.hpp"

#include <algorithm>
#include <sstream>

#include <httplib.h>

#include "urag/core/text.hpp"

namespace urag::providers {

using nlohmann::json;

namespace {

json post_json(const HttpEndpoint& endpoint, Semaphore& semaphore, const json& body,
               int& retries_used) {
    return with_retries(endpoint.retry, retries_used, [&]() -> json {
        SemaphoreGuard guard(semaphore);
        httplib::Client client(endpoint.base_url);
        client.set_connection_timeout(30, 0);
        client.set_read_timeout(120, 0);
        httplib::Headers headers;
        if (!endpoint.api_key.empty())
            headers.emplace("Authorization", "Bearer " + endpoint.api_key);
        auto res = client.Post(endpoint.path, headers, body.dump(), "application/json");
        if (!res) {
            throw core::ProviderError("transport failure contacting " + endpoint.base_url +
                                          endpoint.path + ": " + httplib::to_string(res.error()),
                                      0, /*retryable=*/true);
        }
        if (res->status == 429 || res->status >= 500) {
            throw core::ProviderError("HTTP " + std::to_string(res->status) + " from " +
                                          endpoint.path + ": " + res->body,
                                      res->status, /*retryable=*/true);
        }
        if (res->status < 200 || res->status >= 300) {
            throw core::ProviderError("HTTP " + std::to_string(res->status) + " from " +
                                          endpoint.path + ": " + res->body,
                                      res->status, /*retryable=*/false);
        }
        try {
            return json::parse(res->body);
        } catch (const json::exception& e) {
            throw core::ProviderError(std::string("malformed JSON from backend: ") + e.what(),
                                      res->status, /*retryable=*/false);
        }
    });
}

}  // namespace

json build_chat_body(const ChatRequest& request, const std::string& model) {
    json body;
    body["model"] = model;
    auto& messages = body["messages"] = json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", m.role}, {"content", m.text}});
    }
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    if (request.want_logprobs) {
        body["logprobs"] = true;
        body["top_logprobs"] = request.logprob_top_n;
    }
    return body;
}

ChatResult parse_chat_response(const json& body) {
    ChatResult result;
    try {
        const auto& choice = body.at("choices").at(0);
        result.text = choice.at("message").at("content").get<std::string>();
        if (choice.contains("logprobs") && !choice["logprobs"].is_null() &&
            choice["logprobs"].contains("content")) {
            TokenLogprobs lp;
            for (const auto& entry : choice["logprobs"]["content"]) {
                std::vector<LogprobCandidate> candidates;
                if (entry.contains("top_logprobs")) {
                    for (const auto& c : entry["top_logprobs"]) {
                        candidates.push_back({c.at("token").get<std::string>(),
                                              std::min(0.0, c.at("logprob").get<double>())});
                    }
                }
                if (candidates.empty() && entry.contains("token")) {
                    candidates.push_back({entry.at("token").get<std::string>(),
                                          std::min(0.0, entry.value("logprob", 0.0))});
                }
                std::stable_sort(candidates.begin(), candidates.end(),
                                 [](const auto& a, const auto& b) { return a.logprob > b.logprob; });
                lp.positions.push_back(std::move(candidates));
            }
            lp.validate();
            result.logprobs = std::move(lp);
        }
    } catch (const json::exception& e) {
        throw core::ProviderError(std::string("unexpected chat response shape: ") + e.what());
    }
    return result;
}

json build_embed_body(const std::vector<std::string>& texts, const std::string& model) {
    json body;
    body["model"] = model;
    body["input"] = texts;
    return body;
}

std::vector<std::vector<double>> parse_embed_response(const json& body) {
    try {
        std::vector<std::pair<int, std::vector<double>>> indexed;
        for (const auto& item : body.at("data")) {
            indexed.emplace_back(item.value("index", static_cast<int>(indexed.size())),
                                 item.at("embedding").get<std::vector<double>>());
        }
        std::sort(indexed.begin(), indexed.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::vector<double>> out;
        out.reserve(indexed.size());
        for (auto& [_, v] : indexed) out.push_back(std::move(v));
        return out;
    } catch (const json::exception& e) {
        throw core::ProviderError(std::string("unexpected embeddings response shape: ") + e.what());
    }
}

json build_nli_body(const std::string& premise, const std::string& hypothesis) {
    return json{{"premise", premise}, {"hypothesis", hypothesis}};
}

NliVerdict parse_nli_response(const json& body) {
    auto field = [&](std::initializer_list<const char*> names) -> double {
        for (const char* n : names) {
            if (body.contains(n) && body[n].is_number()) return body[n].get<double>();
        }
        throw core::ProviderError("nli response missing probability fields: " + body.dump());
    };
    NliVerdict v;
    v.entail = field({"entail", "entailment"});
    v.neutral = field({"neutral"});
    v.contradict = field({"contradict", "contradiction"});
    return v;
}

HttpChatProvider::HttpChatProvider(HttpEndpoint endpoint)
    : endpoint_(std::move(endpoint)),
      semaphore_(std::make_unique<Semaphore>(endpoint_.concurrency)) {}

ChatResult HttpChatProvider::chat(const ChatRequest& request) {
    request.validate();
    int retries = 0;
    json response =
        post_json(endpoint_, *semaphore_, build_chat_body(request, endpoint_.model), retries);
    ChatResult result = parse_chat_response(response);
    result.retries_used = retries;
    return result;
}

std::string HttpChatProvider::identity() const {
    return "http-chat(" + endpoint_.base_url + "," + endpoint_.model + ")";
}

HttpEmbedProvider::HttpEmbedProvider(HttpEndpoint endpoint)
    : endpoint_(std::move(endpoint)),
      semaphore_(std::make_unique<Semaphore>(endpoint_.concurrency)) {}

std::vector<std::vector<double>> HttpEmbedProvider::embed_raw(
    const std::vector<std::string>& texts) {
    int retries = 0;
    json response =
        post_json(endpoint_, *semaphore_, build_embed_body(texts, endpoint_.model), retries);
    return parse_embed_response(response);
}

std::string HttpEmbedProvider::identity() const {
    return "http-embed(" + endpoint_.base_url + "," + endpoint_.model + ")";
}

HttpNliProvider::HttpNliProvider(HttpEndpoint endpoint)
    : endpoint_(std::move(endpoint)),
      semaphore_(std::make_unique<Semaphore>(endpoint_.concurrency)) {}

NliVerdict HttpNliProvider::nli_raw(const std::string& premise, const std::string& hypothesis) {
    int retries = 0;
    json response =
        post_json(endpoint_, *semaphore_, build_nli_body(premise, hypothesis), retries);
    return parse_nli_response(response);
}

std::string HttpNliProvider::identity() const {
    return "http-nli(" + endpoint_.base_url + ")";
}

NliVerdict NliOverChatProvider::nli_raw(const std::string& premise,
                                        const std::string& hypothesis) {
    ChatRequest request;
    request.temperature = 0.0;
    request.max_tokens = 64;
    std::ostringstream prompt;
    prompt << "Judge the relation between the premise and the hypothesis.\n"
           << "Premise: " << premise << "\n"
           << "Hypothesis: " << hypothesis << "\n"
           << "Reply with exactly one line of three probabilities summing to 1:\n"
           << "entail=<p> neutral=<p> contradict=<p>";
    request.messages.push_back({"user", prompt.str()});
    ChatResult result = chat_->chat(request);

    NliVerdict v;
    auto grab = [&](const char* key) -> double {
        auto pos = result.text.find(key);
        if (pos == std::string::npos)
            throw core::ProviderError("nli-over-chat: missing field '" + std::string(key) +
                                      "' in: " + result.text);
        pos += std::string(key).size();
        try {
            return std::stod(result.text.substr(pos));
        } catch (const std::exception&) {
            throw core::ProviderError("nli-over-chat: unparseable value for '" +
                                      std::string(key) + "' in: " + result.text);
        }
    };
    v.entail = grab("entail=");
    v.neutral = grab("neutral=");
    v.contradict = grab("contradict=");
    return v;
}

}  // namespace urag::providers
