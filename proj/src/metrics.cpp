#include "mmrec/metrics.hpp"

#include "mmrec/error.hpp"

#include <cmath>

namespace mmrec {

namespace {

InstanceScore score_from_rank(std::optional<int> rank, const std::vector<int>& k_list) {
    InstanceScore s;
    s.target_rank = rank;
    for (int k : k_list) {
        bool hit = rank.has_value() && *rank <= k;
        s.recall_at[k] = hit ? 1.0 : 0.0;
        s.ndcg_at[k] = hit ? 1.0 / std::log2(static_cast<double>(*rank) + 1.0) : 0.0;
    }
    return s;
}

} // namespace

InstanceScore score_instance(const std::vector<int>& ranking, int target_index,
                             const std::vector<int>& k_list) {
    const int n = static_cast<int>(ranking.size());
    if (target_index < 0 || target_index >= n)
        throw Error("score_instance: target_index out of range");
    std::vector<bool> seen(static_cast<size_t>(n), false);
    int rank = -1;
    for (int pos = 0; pos < n; ++pos) {
        int v = ranking[static_cast<size_t>(pos)];
        if (v < 0 || v >= n || seen[static_cast<size_t>(v)])
            throw Error("score_instance: ranking is not a permutation");
        seen[static_cast<size_t>(v)] = true;
        if (v == target_index) rank = pos + 1;
    }
    return score_from_rank(rank, k_list);
}

InstanceScore score_parsed_strict(const std::vector<int>& parsed_indices, int target_index,
                                  const std::vector<int>& k_list) {
    std::optional<int> rank;
    for (size_t pos = 0; pos < parsed_indices.size(); ++pos)
        if (parsed_indices[pos] == target_index) {
            rank = static_cast<int>(pos) + 1;
            break;
        }
    return score_from_rank(rank, k_list);
}

RunMeans aggregate_users(const std::vector<InstanceScore>& scores, const std::vector<int>& k_list) {
    if (scores.empty()) throw Error("aggregate_users: no scores to aggregate");
    RunMeans m;
    m.users = scores.size();
    for (int k : k_list) {
        double r = 0.0, n = 0.0;
        for (const auto& s : scores) {
            r += s.recall_at.at(k);
            n += s.ndcg_at.at(k);
        }
        m.recall[k] = r / static_cast<double>(scores.size());
        m.ndcg[k] = n / static_cast<double>(scores.size());
    }
    return m;
}

RunStat aggregate_runs(const std::vector<double>& run_means) {
    if (run_means.empty()) throw Error("aggregate_runs: no runs");
    RunStat st;
    for (double v : run_means) st.mean += v;
    st.mean /= static_cast<double>(run_means.size());
    if (run_means.size() > 1) {
        double ss = 0.0;
        for (double v : run_means) ss += (v - st.mean) * (v - st.mean);
        st.stddev = std::sqrt(ss / static_cast<double>(run_means.size() - 1));
    }
    return st;
}

} // namespace mmrec
