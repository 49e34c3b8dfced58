#pragma once

#include <map>
#include <optional>
#include <vector>

namespace mmrec {

// Single-target scores. recall_at values are 0/1; ndcg uses binary gain with
// ideal DCG = 1, so ndcg_at[K] = 1/log2(rank+1) when the target is in the
// top K and 0 otherwise.
struct InstanceScore {
    std::map<int, double> recall_at;
    std::map<int, double> ndcg_at;
    std::optional<int> target_rank; // 1-based; absent when unparsed in strict mode
};

// ranking must be a permutation of 0..n-1 containing target_index.
InstanceScore score_instance(const std::vector<int>& ranking, int target_index,
                             const std::vector<int>& k_list);

// Strict mode: ranks only within the parsed indices; an absent target scores
// zero at every K and leaves target_rank unset.
InstanceScore score_parsed_strict(const std::vector<int>& parsed_indices, int target_index,
                                  const std::vector<int>& k_list);

struct RunMeans {
    std::map<int, double> recall;
    std::map<int, double> ndcg;
    size_t users = 0;
};

// Arithmetic mean over users for one run. Errors on empty input.
RunMeans aggregate_users(const std::vector<InstanceScore>& scores, const std::vector<int>& k_list);

struct RunStat {
    double mean = 0.0;
    double stddev = 0.0; // sample std; 0 for a single run
};

RunStat aggregate_runs(const std::vector<double>& run_means);

} // namespace mmrec
