#pragma once

#include "mmrec/client.hpp"
#include "mmrec/config.hpp"
#include "mmrec/corpus.hpp"
#include "mmrec/metrics.hpp"
#include "mmrec/templates.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mmrec {

// Item-level summaries shared across users, strategies and runs. Visual
// summaries are keyed by image content, not path; title summaries by title.
struct SummaryStore {
    std::map<std::string, std::string> visual;        // image key -> summary
    std::map<std::string, std::string> visual_titled; // titled_visual_key -> summary
    std::map<std::string, std::string> title;         // title_key -> summary
    std::map<std::string, std::string> ref_key;       // image ref -> image key
    std::set<std::string> failed_refs;                // refs that would not resolve
    std::set<std::string> failed_keys;                // summary keys whose request failed

    bool empty() const { return visual.empty() && visual_titled.empty() && title.empty(); }
};

std::string titled_visual_key(const std::string& image_key, const std::string& title);
std::string title_key(const std::string& title);

// One summary request per distinct item image (per configured variant) and
// per distinct title where title summaries are needed. No-op when no
// configured strategy has a summary phase.
SummaryStore run_summary_phase(const ExperimentConfig& config,
                               const std::vector<EvalInstance>& instances, Backend& backend,
                               const TemplateCatalog& catalog = default_catalog());

// One scored (user, strategy, run) cell. Excluded instances have no row.
struct ScoreRow {
    std::string user_id;
    int run = 0;
    StrategyId strategy = StrategyId::TitleOnly;
    std::optional<int> target_rank;
    std::map<int, double> recall;
    std::map<int, double> ndcg;
};

struct ExperimentOutcome {
    DatasetStats stats;
    std::vector<ScoreRow> rows; // ordered by (run, strategy config order, instance order)
    std::string template_version;
};

std::shared_ptr<Backend> make_backend(const BackendConfig& config);

struct RunOptions {
    std::shared_ptr<Backend> backend; // overrides config when set (tests)
    bool write_raw = true;            // raw/{strategy}/{run}/{user_id}.txt under output_dir
};

// Full pipeline: corpus -> sample -> instances -> summaries -> per-run
// ranking, parsing, scoring. Deterministic for mock backends or a warm cache.
ExperimentOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// File-safe form of a user id for raw output paths.
std::string sanitize_user_id(const std::string& user_id);

} // namespace mmrec
