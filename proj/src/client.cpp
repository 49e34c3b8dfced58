#include "mmrec/client.hpp"

#include "mmrec/digest.hpp"
#include "mmrec/encoding.hpp"
#include "mmrec/error.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <thread>

namespace mmrec {

using nlohmann::json;

std::string ChatRequest::joined_text() const {
    std::string out;
    for (const auto& p : parts) {
        if (p.kind != PromptPart::Kind::Text) continue;
        if (!out.empty()) out += '\n';
        out += p.value;
    }
    return out;
}

std::string cache_key(const ChatRequest& request) {
    Sha256 h;
    h.field("model", request.model_id);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", request.decoding.temperature);
    h.field("temperature", buf);
    h.field("max_tokens", std::to_string(request.decoding.max_tokens));
    h.field("seed",
            request.decoding.seed ? std::to_string(*request.decoding.seed) : std::string("none"));
    for (const auto& part : request.parts) {
        if (part.kind == PromptPart::Kind::Text) {
            h.field("text", part.value);
        } else {
            h.field("image", image_content_key(part.value));
        }
    }
    return h.hex();
}

InflightGate::InflightGate(int limit) : available_(limit < 1 ? 1 : limit) {}

void InflightGate::acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return available_ > 0; });
    --available_;
}

void InflightGate::release() {
    {
        std::lock_guard lock(mutex_);
        ++available_;
    }
    cv_.notify_one();
}

RateLimiter::RateLimiter(double per_minute)
    : tokens_(per_minute > 0 ? 1.0 : 0.0),
      per_second_(per_minute / 60.0),
      capacity_(per_minute > 0 ? (per_minute < 60.0 ? 1.0 : per_minute / 60.0) : 0.0),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    if (per_second_ <= 0) return;
    for (;;) {
        std::chrono::duration<double> wait{0};
        {
            std::lock_guard lock(mutex_);
            auto now = std::chrono::steady_clock::now();
            tokens_ += per_second_ * std::chrono::duration<double>(now - last_).count();
            if (tokens_ > capacity_) tokens_ = capacity_;
            last_ = now;
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            wait = std::chrono::duration<double>((1.0 - tokens_) / per_second_);
        }
        std::this_thread::sleep_for(wait);
    }
}

namespace {

struct SplitUrl {
    std::string host; // scheme://host[:port]
    std::string path_prefix;
};

SplitUrl split_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos)
        throw Error("backend: base_url must start with http:// or https://: " + base_url);
    auto path_start = base_url.find('/', scheme_end + 3);
    SplitUrl out;
    if (path_start == std::string::npos) {
        out.host = base_url;
    } else {
        out.host = base_url.substr(0, path_start);
        out.path_prefix = base_url.substr(path_start);
    }
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
    return out;
}

json wire_body(const ChatRequest& request) {
    json content = json::array();
    for (const auto& part : request.parts) {
        if (part.kind == PromptPart::Kind::Text) {
            content.push_back({{"type", "text"}, {"text", part.value}});
        } else {
            ImagePayload img = resolve_image(part.value);
            std::string url = img.remote_uri ? img.uri : img.data_uri();
            content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
        }
    }
    json body = {
        {"model", request.model_id},
        {"messages", json::array({json{{"role", "user"}, {"content", std::move(content)}}})},
        {"temperature", request.decoding.temperature},
        {"max_tokens", request.decoding.max_tokens},
    };
    if (request.decoding.seed) body["seed"] = *request.decoding.seed;
    return body;
}

std::string extract_text(const std::string& raw) {
    json doc;
    try {
        doc = json::parse(raw);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("backend: response is not JSON: ") + e.what());
    }
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty())
        throw SchemaError("backend: response has no choices");
    const json& msg = doc["choices"][0].value("message", json::object());
    const json& content = msg.contains("content") ? msg["content"] : json();
    std::string text;
    if (content.is_string()) {
        text = content.get<std::string>();
    } else if (content.is_array()) {
        for (const auto& piece : content)
            if (piece.is_object() && piece.value("type", "") == "text")
                text += piece.value("text", "");
    }
    if (text.empty()) throw SchemaError("backend: response message content is empty");
    return text;
}

std::optional<TokenUsage> extract_usage(const std::string& raw) {
    json doc = json::parse(raw, nullptr, false);
    if (doc.is_discarded() || !doc.contains("usage") || !doc["usage"].is_object())
        return std::nullopt;
    TokenUsage u;
    u.prompt_tokens = doc["usage"].value("prompt_tokens", 0LL);
    u.completion_tokens = doc["usage"].value("completion_tokens", 0LL);
    return u;
}

class RemoteBackend : public Backend {
public:
    explicit RemoteBackend(RemoteSpec spec)
        : spec_(std::move(spec)),
          url_(split_url(spec_.base_url)),
          gate_(spec_.max_inflight),
          limiter_(spec_.requests_per_minute) {
        if (!spec_.api_key_env.empty()) {
            if (const char* key = std::getenv(spec_.api_key_env.c_str())) api_key_ = key;
        }
    }

    CompletionResult complete(const ChatRequest& request) override {
        GateLease lease(gate_);
        const auto started = std::chrono::steady_clock::now();
        const std::string body = wire_body(request).dump();
        const std::string path = url_.path_prefix + "/chat/completions";

        int last_status = 0;
        int retry_after_s = -1;
        std::string last_detail;
        for (int attempt = 0; attempt <= spec_.max_retries; ++attempt) {
            if (attempt > 0) back_off(attempt - 1, retry_after_s);
            retry_after_s = -1;
            limiter_.acquire();

            httplib::Client cli(url_.host);
            cli.set_connection_timeout(spec_.timeout_s, 0);
            cli.set_read_timeout(spec_.timeout_s, 0);
            cli.set_write_timeout(spec_.timeout_s, 0);
            httplib::Headers headers;
            if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

            auto res = cli.Post(path, headers, body, "application/json");
            if (!res) {
                last_status = 0;
                last_detail = "connection failure (" + httplib::to_string(res.error()) + ")";
                continue;
            }
            last_status = res->status;
            if (res->status == 200) {
                CompletionResult out;
                out.text = extract_text(res->body);
                out.usage = extract_usage(res->body);
                out.retries = attempt;
                out.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                     std::chrono::steady_clock::now() - started)
                                     .count();
                return out;
            }
            last_detail = "HTTP " + std::to_string(res->status);
            if (res->status == 429) {
                if (auto ra = res->get_header_value("Retry-After"); !ra.empty())
                    retry_after_s = std::atoi(ra.c_str());
                continue;
            }
            if (res->status >= 500) continue;
            throw TransportError("backend: non-retryable " + last_detail, res->status);
        }
        throw TransportError("backend: " + last_detail + " after " +
                                 std::to_string(spec_.max_retries) + " retries",
                             last_status);
    }

    int max_inflight() const override { return spec_.max_inflight; }

private:
    void back_off(int exhausted_attempts, int retry_after_s) const {
        long long ms = spec_.initial_backoff_ms;
        for (int i = 0; i < exhausted_attempts; ++i) ms *= 2;
        if (retry_after_s >= 0) ms = std::max(ms, 1000LL * retry_after_s);
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    }

    RemoteSpec spec_;
    SplitUrl url_;
    InflightGate gate_;
    RateLimiter limiter_;
    std::string api_key_;
};

} // namespace

std::shared_ptr<Backend> make_remote_backend(const RemoteSpec& spec) {
    return std::make_shared<RemoteBackend>(spec);
}

} // namespace mmrec
