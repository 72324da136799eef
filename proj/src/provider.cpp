#include "dater/provider.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "httplib.h"
#include "nlohmann/json.hpp"

namespace dater::llm {

namespace {

using nlohmann::json;

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 digest failed");
    static const char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

void check_budget(const CompletionRequest& request, size_t budget) {
    if (request.prompt.empty()) throw ProviderError("empty prompt");
    if (budget > 0 && request.prompt.size() > budget)
        throw ContextOverflow("prompt of " + std::to_string(request.prompt.size()) +
                              " chars exceeds the context budget of " +
                              std::to_string(budget));
}

} // namespace

std::string replay_key(const CompletionRequest& request) {
    json canon;
    canon["n"] = request.n;
    canon["prompt"] = request.prompt;
    canon["temperature"] = request.temperature;
    return sha256_hex(canon.dump());
}

ReplayStore::ReplayStore(std::string path) : path_(std::move(path)) {
    if (path_.empty()) return;
    std::ifstream in(path_);
    if (!in.is_open()) return; // a store that does not exist yet is empty
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        if (line.empty()) continue;
        json entry = json::parse(line, nullptr, false);
        if (entry.is_discarded() || !entry.contains("key") || !entry.contains("samples"))
            throw StorageFailure("replay store " + path_ + ": bad entry at line " +
                                 std::to_string(line_no));
        entries_[entry["key"].get<std::string>()] =
            entry["samples"].get<std::vector<std::string>>();
    }
}

std::optional<std::vector<std::string>> ReplayStore::lookup(const std::string& key) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ReplayStore::record(const CompletionRequest& request, const CompletionResponse& response) {
    std::string key = replay_key(request);
    json entry;
    entry["key"] = key;
    entry["request"] = {{"prompt", request.prompt},
                        {"temperature", request.temperature},
                        {"n", request.n}};
    entry["samples"] = response.samples;

    std::unique_lock lock(mutex_);
    if (entries_.count(key))
        std::cerr << "replay store: overwriting entry " << key.substr(0, 12) << "...\n";
    entries_[key] = response.samples;
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::app);
    if (!out.is_open()) throw StorageFailure("cannot open replay store " + path_);
    out << entry.dump() << "\n";
    if (!out.good()) throw StorageFailure("write to replay store " + path_ + " failed");
}

size_t ReplayStore::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

ReplayProvider::ReplayProvider(std::shared_ptr<ReplayStore> store, size_t context_budget_chars)
    : store_(std::move(store)), context_budget_(context_budget_chars) {}

CompletionResponse ReplayProvider::complete(const CompletionRequest& request) {
    check_budget(request, context_budget_);
    std::string key = replay_key(request);
    auto samples = store_->lookup(key);
    if (!samples)
        throw ReplayMiss("no replay entry for key " + key.substr(0, 12) +
                         "... (prompt starts: '" + request.prompt.substr(0, 60) + "')");
    CompletionResponse response;
    response.samples = *samples;
    response.model_id = "replay";
    return response;
}

RateLimiter::RateLimiter(double requests_per_minute, Clock clock, Sleep sleep)
    : capacity_(std::max(1.0, requests_per_minute)),
      refill_per_second_(std::max(1.0, requests_per_minute) / 60.0),
      tokens_(std::max(1.0, requests_per_minute)),
      clock_(clock ? std::move(clock) : [] { return std::chrono::steady_clock::now(); }),
      sleep_(sleep ? std::move(sleep) : [](std::chrono::milliseconds d) {
          std::this_thread::sleep_for(d);
      }) {
    last_refill_ = clock_();
}

void RateLimiter::acquire() {
    std::unique_lock lock(mutex_);
    for (;;) {
        auto now = clock_();
        double elapsed = std::chrono::duration<double>(now - last_refill_).count();
        last_refill_ = now;
        tokens_ = std::min(capacity_, tokens_ + elapsed * refill_per_second_);
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        auto wait_ms = std::chrono::milliseconds(
            static_cast<long long>((1.0 - tokens_) / refill_per_second_ * 1000.0) + 1);
        lock.unlock();
        sleep_(wait_ms);
        lock.lock();
    }
}

HttpProvider::HttpProvider(HttpProviderConfig config)
    : config_(std::move(config)), limiter_(config_.requests_per_minute) {}

CompletionResponse HttpProvider::complete(const CompletionRequest& request) {
    check_budget(request, config_.context_budget_chars);

    json payload;
    payload["model"] = config_.model;
    payload["prompt"] = request.prompt;
    payload["max_tokens"] = request.max_tokens;
    payload["temperature"] = request.temperature;
    payload["n"] = request.n;
    if (!request.stop.empty()) payload["stop"] = request.stop;
    std::string body = payload.dump();

    std::string api_key;
    if (!config_.api_key_env.empty()) {
        const char* value = std::getenv(config_.api_key_env.c_str());
        if (value) api_key = value;
    }

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            auto backoff = std::chrono::milliseconds(
                static_cast<long long>(config_.initial_backoff_ms) << (attempt - 1));
            std::this_thread::sleep_for(backoff);
        }
        limiter_.acquire();

        httplib::Client client(config_.base_url);
        client.set_connection_timeout(config_.timeout_seconds);
        client.set_read_timeout(config_.timeout_seconds);
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

        auto result = client.Post("/completions", headers, body, "application/json");
        if (!result) {
            last_error = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status == 429 || result->status >= 500) {
            last_error = "http status " + std::to_string(result->status);
            continue;
        }
        if (result->status != 200)
            throw ProviderUnavailable("completion request rejected with status " +
                                      std::to_string(result->status) + ": " + result->body);

        json parsed = json::parse(result->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("choices")) {
            last_error = "malformed response body";
            continue;
        }
        CompletionResponse response;
        for (const auto& choice : parsed["choices"])
            response.samples.push_back(choice.value("text", std::string()));
        if (response.samples.size() != static_cast<size_t>(request.n)) {
            last_error = "expected " + std::to_string(request.n) + " samples, got " +
                         std::to_string(response.samples.size());
            continue;
        }
        response.model_id = parsed.value("model", config_.model);
        if (parsed.contains("usage")) {
            TokenUsage usage;
            usage.prompt_tokens = parsed["usage"].value("prompt_tokens", 0LL);
            usage.completion_tokens = parsed["usage"].value("completion_tokens", 0LL);
            response.usage = usage;
        }
        return response;
    }
    throw ProviderUnavailable("completion failed after " +
                              std::to_string(config_.max_retries + 1) +
                              " attempts; last error: " + last_error);
}

RecordingProvider::RecordingProvider(std::shared_ptr<Provider> inner,
                                     std::shared_ptr<ReplayStore> store)
    : inner_(std::move(inner)), store_(std::move(store)) {}

CompletionResponse RecordingProvider::complete(const CompletionRequest& request) {
    CompletionResponse response = inner_->complete(request);
    store_->record(request, response);
    return response;
}

} // namespace dater::llm
