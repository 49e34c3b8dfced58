#include "mmrec/cache.hpp"

#include "mmrec/error.hpp"
#include "mmrec/rng.hpp"

#include "json.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace mmrec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string now_iso8601() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string unique_suffix() {
    static std::atomic<unsigned long long> counter{0};
    std::ostringstream os;
    os << std::hex << fnv1a64(std::to_string(
              std::chrono::steady_clock::now().time_since_epoch().count()))
       << "." << counter.fetch_add(1);
    return os.str();
}

} // namespace

CacheStore::CacheStore(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error("cache: cannot create directory " + dir_.string() + ": " + ec.message());
}

fs::path CacheStore::path_for(const std::string& key) const {
    if (key.size() < 3) throw Error("cache: key too short: " + key);
    return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<CacheEntry> CacheStore::load(const std::string& key) const {
    const fs::path path = path_for(key);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream buf;
    buf << in.rdbuf();
    in.close();

    json doc = json::parse(buf.str(), nullptr, false);
    bool ok = doc.is_object() && doc.value("request_digest", "") == key &&
              doc.contains("text") && doc["text"].is_string() &&
              !doc["text"].get<std::string>().empty();
    if (!ok) {
        std::error_code ec;
        fs::rename(path, path.string() + ".corrupt", ec);
        std::fprintf(stderr, "[cache] quarantined corrupt entry %s\n", path.string().c_str());
        return std::nullopt;
    }

    CacheEntry entry;
    entry.request_digest = key;
    entry.model_id = doc.value("model_id", "");
    entry.text = doc["text"].get<std::string>();
    entry.created_at = doc.value("created_at", "");
    if (doc.contains("usage") && doc["usage"].is_object()) {
        TokenUsage u;
        u.prompt_tokens = doc["usage"].value("prompt_tokens", 0LL);
        u.completion_tokens = doc["usage"].value("completion_tokens", 0LL);
        entry.usage = u;
    }
    return entry;
}

void CacheStore::store(const std::string& key, const CacheEntry& entry) const {
    const fs::path path = path_for(key);
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec)
        throw Error("cache: cannot create directory " + path.parent_path().string() + ": " +
                    ec.message());

    json doc = {
        {"request_digest", key},
        {"model_id", entry.model_id},
        {"text", entry.text},
        {"created_at", entry.created_at.empty() ? now_iso8601() : entry.created_at},
    };
    if (entry.usage)
        doc["usage"] = {{"prompt_tokens", entry.usage->prompt_tokens},
                        {"completion_tokens", entry.usage->completion_tokens}};

    const fs::path tmp = path.string() + "." + unique_suffix() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cache: cannot write " + tmp.string());
        out << doc.dump(2) << '\n';
        if (!out) throw Error("cache: write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cache: cannot finalize " + path.string() + ": " + ec.message());
    }
}

namespace {

class CachingBackend : public Backend {
public:
    CachingBackend(std::shared_ptr<Backend> inner, fs::path dir)
        : inner_(std::move(inner)), store_(std::move(dir)) {}

    CompletionResult complete(const ChatRequest& request) override {
        const std::string key = cache_key(request);
        if (auto hit = store_.load(key)) {
            CompletionResult out;
            out.text = hit->text;
            out.usage = hit->usage;
            out.from_cache = true;
            return out;
        }
        CompletionResult out = inner_->complete(request);
        CacheEntry entry;
        entry.request_digest = key;
        entry.model_id = request.model_id;
        entry.text = out.text;
        entry.usage = out.usage;
        store_.store(key, entry);
        return out;
    }

    int max_inflight() const override { return inner_->max_inflight(); }

private:
    std::shared_ptr<Backend> inner_;
    CacheStore store_;
};

} // namespace

std::shared_ptr<Backend> with_cache(std::shared_ptr<Backend> inner, fs::path dir) {
    return std::make_shared<CachingBackend>(std::move(inner), std::move(dir));
}

} // namespace mmrec
