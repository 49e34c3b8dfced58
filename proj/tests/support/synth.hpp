#pragma once

// On-disk synthetic corpora for pipeline tests: product-style titles with
// distinct normalized forms, data-URI images, and configurable sequence
// lengths.

#include "mmrec/config.hpp"
#include "mmrec/corpus.hpp"
#include "mmrec/encoding.hpp"
#include "mmrec/rng.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace synth {

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
}

// Sequences with exact aggregate counts: `users` sequences over `items`
// distinct ids totalling `interactions` entries, every id used at least once
// (requires interactions >= items and interactions >= 2 * users).
inline std::vector<mmrec::UserSequence> scaled_sequences(std::size_t users, std::size_t items,
                                                         std::size_t interactions) {
    std::vector<mmrec::UserSequence> out(users);
    const std::size_t base = interactions / users;
    const std::size_t extra = interactions % users;
    std::size_t next_item = 0;
    for (std::size_t u = 0; u < users; ++u) {
        out[u].user_id = "u" + std::to_string(u);
        const std::size_t len = base + (u < extra ? 1 : 0);
        for (std::size_t j = 0; j < len; ++j) {
            const std::size_t id = next_item++ % items;
            out[u].entries.push_back(
                {"it" + std::to_string(id), "Item " + std::to_string(id), std::nullopt});
        }
    }
    return out;
}

inline const std::vector<std::string>& adjectives() {
    static const std::vector<std::string> v = {
        "Canyon", "Maple",  "Quartz", "Birch",  "Nimbus", "Copper", "Juniper", "Atlas",
        "Linen",  "Cedar",  "Falcon", "Tundra", "Prism",  "Echo",   "Vertex",  "Halo",
        "Breeze", "Slate",  "Garnet", "Opal",   "Saffron", "Pebble", "Frost",  "Olive",
    };
    return v;
}

inline const std::vector<std::string>& nouns() {
    static const std::vector<std::string> v = {
        "Lantern",  "Organizer", "Clock",   "Tray",    "Pillow",  "Press",    "Candle",
        "Poster",   "Blanket",   "Rack",    "Mouse",   "Sleeve",  "Hub",      "Speaker",
        "Keyboard", "Light",     "Fan",     "Drive",   "Skillet", "Bowl",     "Grinder",
        "Scale",    "Tricycle",  "Board",
    };
    return v;
}

// "Canyon 017 Lantern": the number sits mid-title so prose sentences never
// end a title with digits, and the zero padding keeps tokens distinct.
inline std::string item_title(std::size_t i) {
    char num[8];
    std::snprintf(num, sizeof num, "%03zu", i);
    return adjectives()[i % adjectives().size()] + " " + num + " " +
           nouns()[(i / adjectives().size()) % nouns().size()];
}

inline std::string image_data_uri(std::size_t i) {
    const std::string bytes = "synthimg-" + std::to_string(i);
    return "data:image/png;base64," + mmrec::base64_encode(bytes);
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

struct CorpusSpec {
    std::size_t users = 30;
    std::size_t items = 150;
    std::size_t min_len = 3;
    std::size_t max_len = 6;
    double imaged_fraction = 1.0;
    std::uint64_t seed = 1;
};

struct CorpusFiles {
    std::string interactions;
    std::string catalog;
};

inline std::filesystem::path fresh_dir(const std::string& name) {
    static std::atomic<unsigned> counter{0};
    auto dir = std::filesystem::temp_directory_path() / "mmrec_tests" /
               (name + "_" + std::to_string(counter.fetch_add(1)));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline CorpusFiles write_corpus(const std::filesystem::path& dir, const CorpusSpec& spec) {
    std::filesystem::create_directories(dir);
    CorpusFiles files{(dir / "interactions.jsonl").string(), (dir / "catalog.jsonl").string()};

    mmrec::Rng rng(mmrec::mix_seed(spec.seed, 0x73796e74ULL));
    {
        std::ofstream out(files.catalog, std::ios::binary | std::ios::trunc);
        for (std::size_t i = 0; i < spec.items; ++i) {
            const bool imaged =
                spec.imaged_fraction >= 1.0 ||
                (spec.imaged_fraction > 0.0 && rng.unit() < spec.imaged_fraction);
            out << "{\"item_id\":\"it" << i << "\",\"title\":\"" << json_escape(item_title(i))
                << "\",\"image\":";
            if (imaged)
                out << '"' << image_data_uri(i) << '"';
            else
                out << "null";
            out << "}\n";
        }
    }
    {
        std::ofstream out(files.interactions, std::ios::binary | std::ios::trunc);
        std::vector<std::size_t> pool(spec.items);
        for (std::size_t i = 0; i < spec.items; ++i) pool[i] = i;
        long long ts = 1600000000;
        for (std::size_t u = 0; u < spec.users; ++u) {
            const std::size_t len =
                spec.min_len + (spec.max_len > spec.min_len
                                    ? rng.below(spec.max_len - spec.min_len + 1)
                                    : 0);
            mmrec::shuffle_vec(pool, rng);
            for (std::size_t j = 0; j < len && j < pool.size(); ++j) {
                out << "{\"user_id\":\"user" << u << "\",\"item_id\":\"it" << pool[j]
                    << "\",\"timestamp\":" << ts << "}\n";
                ts += 10;
            }
        }
    }
    return files;
}

inline mmrec::ExperimentConfig base_config(const CorpusFiles& files,
                                           const std::filesystem::path& work_dir) {
    mmrec::ExperimentConfig cfg;
    cfg.dataset = "synth";
    cfg.interactions_path = files.interactions;
    cfg.catalog_path = files.catalog;
    cfg.user_count = 20;
    cfg.sample_seed = 7;
    cfg.n_candidates = 10;
    cfg.strategies = {mmrec::StrategyId::TitleOnly};
    cfg.model_id = "test-model";
    cfg.backend.kind = "mock";
    cfg.backend.behavior = mmrec::MockBehavior::Oracle;
    cfg.k_list = {5, 10};
    cfg.runs = 2;
    cfg.cache_dir = (work_dir / "cache").string();
    cfg.output_dir = (work_dir / "out").string();
    return cfg;
}

} // namespace synth
