#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "dater/errors.hpp"

namespace dater::llm {

class ProviderError : public Error {
public:
    using Error::Error;
};
class ContextOverflow : public ProviderError {
public:
    using ProviderError::ProviderError;
};
class ProviderUnavailable : public ProviderError {
public:
    using ProviderError::ProviderError;
};
class ReplayMiss : public ProviderError {
public:
    using ProviderError::ProviderError;
};
class StorageFailure : public ProviderError {
public:
    using ProviderError::ProviderError;
};

struct CompletionRequest {
    std::string prompt;
    double temperature = 0.0;
    int max_tokens = 256;
    int n = 1;
    std::vector<std::string> stop;
};

struct TokenUsage {
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
};

struct CompletionResponse {
    std::vector<std::string> samples;
    std::string model_id;
    std::optional<TokenUsage> usage;
};

// Lookup key for record/replay: a content hash over exactly (prompt, n,
// temperature), so any prompt drift shows up as a ReplayMiss instead of a
// silently different fixture.
std::string replay_key(const CompletionRequest& request);

class Provider {
public:
    virtual ~Provider() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

// JSON-lines store, one entry per line:
//   {"key": str, "request": {"prompt", "temperature", "n"}, "samples": [str]}
// Entries are append-only; re-recording a key keeps the last write and
// logs the replacement. An empty path keeps the store in memory only.
class ReplayStore {
public:
    explicit ReplayStore(std::string path);

    std::optional<std::vector<std::string>> lookup(const std::string& key) const;
    void record(const CompletionRequest& request, const CompletionResponse& response);
    size_t size() const;
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::unordered_map<std::string, std::vector<std::string>> entries_;
    mutable std::shared_mutex mutex_;
};

class ReplayProvider : public Provider {
public:
    ReplayProvider(std::shared_ptr<ReplayStore> store, size_t context_budget_chars);
    CompletionResponse complete(const CompletionRequest& request) override;

private:
    std::shared_ptr<ReplayStore> store_;
    size_t context_budget_;
};

// Token bucket admission control. acquire() blocks until a token is
// available. The clock and sleep hooks exist so tests can run on a fake
// timeline.
class RateLimiter {
public:
    using Clock = std::function<std::chrono::steady_clock::time_point()>;
    using Sleep = std::function<void(std::chrono::milliseconds)>;

    RateLimiter(double requests_per_minute, Clock clock = nullptr, Sleep sleep = nullptr);
    void acquire();

private:
    double capacity_;
    double refill_per_second_;
    double tokens_;
    std::chrono::steady_clock::time_point last_refill_;
    Clock clock_;
    Sleep sleep_;
    std::mutex mutex_;
};

struct HttpProviderConfig {
    std::string base_url;            // e.g. http://localhost:8089/v1
    std::string model;
    std::string api_key_env;         // name of the env var holding the key
    size_t context_budget_chars = 16000;
    int max_retries = 3;             // retries after the first attempt
    int initial_backoff_ms = 250;
    double requests_per_minute = 60.0;
    int timeout_seconds = 120;
};

// POSTs an OpenAI-style completion payload to <base_url>/completions and
// retries transient failures (connect errors, 429, 5xx) with exponential
// backoff. A rate limiter gates every attempt.
class HttpProvider : public Provider {
public:
    explicit HttpProvider(HttpProviderConfig config);
    CompletionResponse complete(const CompletionRequest& request) override;

private:
    HttpProviderConfig config_;
    RateLimiter limiter_;
};

// Live provider wrapped so every completed call lands in the replay store;
// this is what `record` mode runs.
class RecordingProvider : public Provider {
public:
    RecordingProvider(std::shared_ptr<Provider> inner, std::shared_ptr<ReplayStore> store);
    CompletionResponse complete(const CompletionRequest& request) override;

private:
    std::shared_ptr<Provider> inner_;
    std::shared_ptr<ReplayStore> store_;
};

} // namespace dater::llm
