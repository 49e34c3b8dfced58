#pragma once

#include "mmrec/prompting.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace mmrec {

struct DecodingParams {
    double temperature = 0.0;
    int max_tokens = 512;
    std::optional<long long> seed;
};

struct TokenUsage {
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
};

// Test/mock side channel: tells a mock backend which candidates a ranking
// request is about. Remote transports and cache keys ignore it entirely.
struct RankingHint {
    std::vector<std::string> candidates;
    int target_index = 0;
};

struct ChatRequest {
    std::string model_id;
    std::vector<PromptPart> parts;
    DecodingParams decoding;
    std::optional<RankingHint> hint;

    std::string joined_text() const;
};

struct CompletionResult {
    std::string text;
    long long latency_ms = 0;
    std::optional<TokenUsage> usage;
    bool from_cache = false;
    int retries = 0;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual CompletionResult complete(const ChatRequest& request) = 0;
    virtual int max_inflight() const = 0;
};

// Stable digest over model id, text parts, image payload content (not paths)
// and decoding parameters. The ranking hint is excluded.
std::string cache_key(const ChatRequest& request);

// Counting semaphore bounding concurrent requests inside a backend.
class InflightGate {
public:
    explicit InflightGate(int limit);
    void acquire();
    void release();

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int available_;
};

class GateLease {
public:
    explicit GateLease(InflightGate& gate) : gate_(gate) { gate_.acquire(); }
    ~GateLease() { gate_.release(); }
    GateLease(const GateLease&) = delete;
    GateLease& operator=(const GateLease&) = delete;

private:
    InflightGate& gate_;
};

// Token bucket in requests per minute; 0 disables limiting.
class RateLimiter {
public:
    explicit RateLimiter(double per_minute);
    void acquire();

private:
    std::mutex mutex_;
    double tokens_;
    double per_second_;
    double capacity_;
    std::chrono::steady_clock::time_point last_;
};

struct RemoteSpec {
    std::string base_url;
    std::string api_key_env;
    int timeout_s = 120;
    int max_retries = 3;
    int max_inflight = 4;
    double requests_per_minute = 0;
    int initial_backoff_ms = 500;
};

std::shared_ptr<Backend> make_remote_backend(const RemoteSpec& spec);

} // namespace mmrec
