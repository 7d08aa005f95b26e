#pragma once

#include <chrono>
#include <functional>
#include <thread>

#include "urag/core/errors.hpp"

namespace urag::providers {

// 3 attempts, exponential backoff starting at 500 ms, retrying only errors
// marked retryable (transport failures, 429, 5xx).
struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
    // Injectable for tests; defaults to sleeping.
    std::function<void(std::chrono::milliseconds)> sleeper =
        [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
};

template <typename F>
auto with_retries(const RetryPolicy& policy, int& retries_used, F&& fn) -> decltype(fn()) {
    auto backoff = policy.initial_backoff;
    retries_used = 0;
    for (int attempt = 1;; ++attempt) {
        try {
            return fn();
        } catch (const core::ProviderError& e) {
            if (!e.retryable() || attempt >= policy.max_attempts) throw;
            policy.sleeper(backoff);
            backoff = std::chrono::milliseconds(
                static_cast<long long>(static_cast<double>(backoff.count()) * policy.multiplier));
            ++retries_used;
        }
    }
}

}  // namespace urag::providers
