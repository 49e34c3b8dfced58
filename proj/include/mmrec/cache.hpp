#pragma once

#include "mmrec/client.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace mmrec {

struct CacheEntry {
    std::string request_digest;
    std::string model_id;
    std::string text;
    std::optional<TokenUsage> usage;
    std::string created_at;
};

// One JSON file per key under {dir}/{key[0..2]}/{key}.json, written via
// temp file + rename so readers never see a partial entry. Unreadable or
// mismatched entries are renamed aside and treated as misses.
class CacheStore {
public:
    explicit CacheStore(std::filesystem::path dir);

    std::optional<CacheEntry> load(const std::string& key) const;
    void store(const std::string& key, const CacheEntry& entry) const;
    std::filesystem::path path_for(const std::string& key) const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

std::shared_ptr<Backend> with_cache(std::shared_ptr<Backend> inner, std::filesystem::path dir);

} // namespace mmrec
