#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace mmrec {

struct Item {
    std::string item_id;
    std::string title;
    std::optional<std::string> image_ref; // path, data: URI, or http(s) URI
};

struct Catalog {
    std::vector<Item> items;
    std::unordered_map<std::string, size_t> by_id;

    const Item* find(const std::string& item_id) const {
        auto it = by_id.find(item_id);
        return it == by_id.end() ? nullptr : &items[it->second];
    }
};

struct SeqEntry {
    std::string item_id;
    std::string title;
    std::optional<std::string> image_ref;
};

// One user's interactions, chronological. Always length >= 2 after loading.
struct UserSequence {
    std::string user_id;
    std::vector<SeqEntry> entries;
};

// Leave-last-out evaluation unit: history is everything but the final entry,
// whose title is hidden among sampled negatives at target_index.
struct EvalInstance {
    std::string user_id;
    std::vector<SeqEntry> history;
    std::vector<std::string> candidates;
    int target_index = -1;
    uint64_t rng_seed = 0; // per-user seed that produced negatives + shuffle
};

struct DatasetStats {
    size_t users = 0;
    size_t items = 0;        // distinct item_ids referenced by the sequences
    size_t interactions = 0; // total sequence entries
    double sparsity = 0.0;   // 1 - interactions / (users * items)
};

struct LoadResult {
    std::vector<UserSequence> sequences; // ordered by first appearance in the log
    Catalog catalog;
    size_t dropped_users = 0; // users with fewer than 2 interactions
};

// Reads the JSON-lines interaction log and item catalog. Each sequence is
// sorted by (timestamp, file order). Throws SchemaError with the offending
// line number on malformed records, and an error naming the ids when an
// interaction references an item missing from the catalog.
LoadResult load_corpus(const std::string& interactions_path, const std::string& catalog_path);

// Uniform sample without replacement, deterministic for a given seed. The
// returned sequences keep their original corpus order and content.
std::vector<UserSequence> sample_users(const std::vector<UserSequence>& sequences, size_t count,
                                       uint64_t seed);

// Builds one instance per sequence: target = last title, history = the rest,
// n_candidates-1 negatives drawn uniformly from catalog items outside the
// user's sequence, then a seeded shuffle. Negative titles colliding (after
// normalization) with any history/candidate title are resampled.
std::vector<EvalInstance> build_eval_instances(const std::vector<UserSequence>& sequences,
                                               const Catalog& catalog, int n_candidates,
                                               uint64_t seed);

DatasetStats compute_stats(const std::vector<UserSequence>& sequences, const Catalog& catalog);

// CSV with header users,items,interactions,sparsity_pct (percentage, 2 decimals).
std::string stats_csv(const DatasetStats& stats);

} // namespace mmrec
