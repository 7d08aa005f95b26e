#pragma once

#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "urag/providers/provider.hpp"
#include "urag/providers/retry.hpp"

namespace urag::providers {

// Bounds in-flight requests per client; default 8.
class Semaphore {
public:
    explicit Semaphore(int count) : count_(count) {}
    void acquire() {
        std::unique_lock<std::mutex> lock(mutex_);
        cv_.wait(lock, [&] { return count_ > 0; });
        --count_;
    }
    void release() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            ++count_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int count_;
};

struct SemaphoreGuard {
    explicit SemaphoreGuard(Semaphore& s) : sem(s) { sem.acquire(); }
    ~SemaphoreGuard() { sem.release(); }
    Semaphore& sem;
};

struct HttpEndpoint {
    std::string base_url;  // scheme://host:port
    std::string path;      // e.g. /v1/chat/completions
    std::string model;
    std::string api_key;
    RetryPolicy retry;
    int concurrency = 8;
};

// Wire-shape builders/parsers, split out so request serialization is testable
// without a network.
nlohmann::json build_chat_body(const ChatRequest& request, const std::string& model);
ChatResult parse_chat_response(const nlohmann::json& body);
nlohmann::json build_embed_body(const std::vector<std::string>& texts, const std::string& model);
std::vector<std::vector<double>> parse_embed_response(const nlohmann::json& body);
nlohmann::json build_nli_body(const std::string& premise, const std::string& hypothesis);
NliVerdict parse_nli_response(const nlohmann::json& body);

class HttpChatProvider : public ChatProvider {
public:
    explicit HttpChatProvider(HttpEndpoint endpoint);
    ChatResult chat(const ChatRequest& request) override;
    std::string identity() const override;

private:
    HttpEndpoint endpoint_;
    std::unique_ptr<Semaphore> semaphore_;
};

class HttpEmbedProvider : public EmbedProvider {
public:
    explicit HttpEmbedProvider(HttpEndpoint endpoint);
    std::string identity() const override;

protected:
    std::vector<std::vector<double>> embed_raw(const std::vector<std::string>& texts) override;

private:
    HttpEndpoint endpoint_;
    std::unique_ptr<Semaphore> semaphore_;
};

class HttpNliProvider : public NliProvider {
public:
    explicit HttpNliProvider(HttpEndpoint endpoint);
    std::string identity() const override;

protected:
    NliVerdict nli_raw(const std::string& premise, const std::string& hypothesis) override;

private:
    HttpEndpoint endpoint_;
    std::unique_ptr<Semaphore> semaphore_;
};

// Chat-prompted fallback for deployments without a classifier endpoint.
class NliOverChatProvider : public NliProvider {
public:
    explicit NliOverChatProvider(std::shared_ptr<ChatProvider> chat) : chat_(std::move(chat)) {}
    std::string identity() const override { return "nli-over-chat(" + chat_->identity() + ")"; }

protected:
    NliVerdict nli_raw(const std::string& premise, const std::string& hypothesis) override;

private:
    std::shared_ptr<ChatProvider> chat_;
};

}  // namespace urag::providers
