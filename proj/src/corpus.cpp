#include "mmrec/corpus.hpp"

#include "mmrec/error.hpp"
#include "mmrec/ranking_parser.hpp"
#include "mmrec/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_set>

using nlohmann::json;

namespace mmrec {

namespace {

std::string trim_copy(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

json parse_line(const std::string& line, const std::string& path, size_t lineno) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw SchemaError(path + ":" + std::to_string(lineno) + ": malformed JSON record");
    return j;
}

std::string require_string(const json& j, const char* key, const std::string& path,
                           size_t lineno) {
    if (!j.contains(key) || !j.at(key).is_string())
        throw SchemaError(path + ":" + std::to_string(lineno) + ": missing string field \"" +
                          key + "\"");
    return j.at(key).get<std::string>();
}

} // namespace

LoadResult load_corpus(const std::string& interactions_path, const std::string& catalog_path) {
    LoadResult out;

    std::ifstream cat(catalog_path);
    if (!cat) throw Error("cannot open catalog file: " + catalog_path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(cat, line)) {
        ++lineno;
        if (trim_copy(line).empty()) continue;
        json j = parse_line(line, catalog_path, lineno);
        Item item;
        item.item_id = require_string(j, "item_id", catalog_path, lineno);
        item.title = require_string(j, "title", catalog_path, lineno);
        if (trim_copy(item.title).empty())
            throw SchemaError(catalog_path + ":" + std::to_string(lineno) +
                              ": empty title for item " + item.item_id);
        if (j.contains("image") && !j.at("image").is_null()) {
            if (!j.at("image").is_string())
                throw SchemaError(catalog_path + ":" + std::to_string(lineno) +
                                  ": \"image\" must be a string or null");
            item.image_ref = j.at("image").get<std::string>();
        }
        if (out.catalog.by_id.count(item.item_id))
            throw SchemaError(catalog_path + ":" + std::to_string(lineno) +
                              ": duplicate item_id " + item.item_id);
        out.catalog.by_id.emplace(item.item_id, out.catalog.items.size());
        out.catalog.items.push_back(std::move(item));
    }

    struct RawInteraction {
        std::string item_id;
        int64_t timestamp;
        size_t file_order;
    };
    std::vector<std::string> user_order;
    std::unordered_map<std::string, std::vector<RawInteraction>> by_user;
    std::set<std::string> unknown_items;

    std::ifstream in(interactions_path);
    if (!in) throw Error("cannot open interactions file: " + interactions_path);
    lineno = 0;
    size_t order = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim_copy(line).empty()) continue;
        json j = parse_line(line, interactions_path, lineno);
        std::string user_id = require_string(j, "user_id", interactions_path, lineno);
        std::string item_id = require_string(j, "item_id", interactions_path, lineno);
        if (!j.contains("timestamp") || !j.at("timestamp").is_number_integer())
            throw SchemaError(interactions_path + ":" + std::to_string(lineno) +
                              ": missing integer field \"timestamp\"");
        int64_t ts = j.at("timestamp").get<int64_t>();
        if (!out.catalog.find(item_id)) {
            unknown_items.insert(item_id);
            continue;
        }
        auto [it, inserted] = by_user.try_emplace(user_id);
        if (inserted) user_order.push_back(user_id);
        it->second.push_back({std::move(item_id), ts, order++});
    }

    if (!unknown_items.empty()) {
        std::string ids;
        for (const auto& id : unknown_items) {
            if (!ids.empty()) ids += ", ";
            ids += id;
        }
        throw SchemaError(interactions_path + ": interactions reference unknown item_ids: " + ids);
    }

    for (const auto& uid : user_order) {
        auto& raw = by_user[uid];
        std::stable_sort(raw.begin(), raw.end(), [](const RawInteraction& a, const RawInteraction& b) {
            if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
            return a.file_order < b.file_order; // ties keep file order
        });
        if (raw.size() < 2) {
            ++out.dropped_users;
            continue;
        }
        UserSequence seq;
        seq.user_id = uid;
        seq.entries.reserve(raw.size());
        for (const auto& r : raw) {
            const Item* item = out.catalog.find(r.item_id);
            seq.entries.push_back({r.item_id, item->title, item->image_ref});
        }
        out.sequences.push_back(std::move(seq));
    }
    if (out.dropped_users > 0)
        std::fprintf(stderr, "[corpus] dropped %zu user(s) with fewer than 2 interactions\n",
                     out.dropped_users);
    return out;
}

std::vector<UserSequence> sample_users(const std::vector<UserSequence>& sequences, size_t count,
                                       uint64_t seed) {
    if (count > sequences.size())
        throw Error("sample_users: requested " + std::to_string(count) + " users but only " +
                    std::to_string(sequences.size()) + " available");
    std::vector<size_t> idx(sequences.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(mix_seed(seed, 0x5a6d70ULL));
    // Partial Fisher-Yates: the first `count` slots are a uniform sample.
    for (size_t i = 0; i < count && idx.size() > 1; ++i) {
        size_t j = i + static_cast<size_t>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end()); // keep corpus order
    std::vector<UserSequence> out;
    out.reserve(count);
    for (size_t i : idx) out.push_back(sequences[i]);
    return out;
}

std::vector<EvalInstance> build_eval_instances(const std::vector<UserSequence>& sequences,
                                               const Catalog& catalog, int n_candidates,
                                               uint64_t seed) {
    if (n_candidates < 2) throw Error("build_eval_instances: n_candidates must be >= 2");
    std::vector<EvalInstance> out;
    out.reserve(sequences.size());

    for (const auto& seq : sequences) {
        if (seq.entries.size() < 2)
            throw Error("build_eval_instances: user " + seq.user_id +
                        " has fewer than 2 interactions");

        EvalInstance inst;
        inst.user_id = seq.user_id;
        inst.rng_seed = mix_seed(seed, fnv1a64(seq.user_id));
        Rng rng(inst.rng_seed);

        const SeqEntry& target = seq.entries.back();
        inst.history.assign(seq.entries.begin(), seq.entries.end() - 1);

        std::unordered_set<std::string> own_items;
        std::unordered_set<std::string> taken_norms; // history + chosen candidates
        for (const auto& e : seq.entries) {
            own_items.insert(e.item_id);
            taken_norms.insert(normalize_title(e.title));
        }

        std::vector<size_t> pool;
        pool.reserve(catalog.items.size());
        for (size_t i = 0; i < catalog.items.size(); ++i)
            if (!own_items.count(catalog.items[i].item_id)) pool.push_back(i);

        const size_t need = static_cast<size_t>(n_candidates - 1);
        if (pool.size() < need)
            throw Error("build_eval_instances: catalog too small to supply " +
                        std::to_string(need) + " negatives for user " + seq.user_id);

        std::vector<std::string> negatives;
        negatives.reserve(need);
        while (negatives.size() < need) {
            bool found = false;
            for (int attempt = 0; attempt < 100 && !pool.empty(); ++attempt) {
                size_t slot = static_cast<size_t>(rng.below(pool.size()));
                const Item& cand = catalog.items[pool[slot]];
                pool[slot] = pool.back();
                pool.pop_back(); // drawn without replacement either way
                std::string norm = normalize_title(cand.title);
                if (norm.empty() || taken_norms.count(norm)) continue; // collision: resample
                taken_norms.insert(std::move(norm));
                negatives.push_back(cand.title);
                found = true;
                break;
            }
            if (!found)
                throw Error("build_eval_instances: could not sample a distinct negative for user " +
                            seq.user_id + " (catalog too small or titles collide)");
        }

        inst.candidates.push_back(target.title);
        for (auto& n : negatives) inst.candidates.push_back(std::move(n));
        shuffle_vec(inst.candidates, rng);
        for (size_t i = 0; i < inst.candidates.size(); ++i)
            if (inst.candidates[i] == target.title) {
                inst.target_index = static_cast<int>(i);
                break;
            }
        out.push_back(std::move(inst));
    }
    return out;
}

DatasetStats compute_stats(const std::vector<UserSequence>& sequences, const Catalog&) {
    DatasetStats s;
    s.users = sequences.size();
    std::unordered_set<std::string> distinct;
    for (const auto& seq : sequences) {
        s.interactions += seq.entries.size();
        for (const auto& e : seq.entries) distinct.insert(e.item_id);
    }
    s.items = distinct.size();
    const double cells = static_cast<double>(s.users) * static_cast<double>(s.items);
    s.sparsity = cells > 0 ? 1.0 - static_cast<double>(s.interactions) / cells : 0.0;
    return s;
}

std::string stats_csv(const DatasetStats& stats) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "users,items,interactions,sparsity_pct\n%zu,%zu,%zu,%.2f\n",
                  stats.users, stats.items, stats.interactions, stats.sparsity * 100.0);
    return buf;
}

} // namespace mmrec
