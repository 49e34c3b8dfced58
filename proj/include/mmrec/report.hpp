#pragma once

#include "mmrec/runner.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mmrec {

// One grid cell: (strategy, metric, K) aggregated over runs. A cell with no
// scored instances in any run renders as NA.
struct CellAggregate {
    StrategyId strategy = StrategyId::TitleOnly;
    char metric = 'R'; // 'R' recall, 'N' ndcg
    int k = 0;
    std::vector<double> run_means; // one per run that had data
    double mean = 0.0;
    double stddev = 0.0;
    bool has_data = false;
    std::size_t users = 0;    // scored instances summed over runs
    std::size_t excluded = 0; // exclusions summed over runs
};

struct StrategyRunStat {
    std::size_t scored = 0;
    std::size_t excluded = 0;
};

// Cells in (strategy config order) x (R, N) x (k_list order).
std::vector<CellAggregate> aggregate_grid(const ExperimentConfig& config,
                                          const std::vector<ScoreRow>& rows);

// Per (strategy, run) coverage, indexed [strategy position][run].
std::vector<std::vector<StrategyRunStat>> tally_coverage(const ExperimentConfig& config,
                                                         const std::vector<ScoreRow>& rows);

std::string render_report_csv(const ExperimentConfig& config,
                              const std::vector<CellAggregate>& grid);
std::string render_report_md(const ExperimentConfig& config, const DatasetStats& stats,
                             const std::vector<CellAggregate>& grid,
                             const std::vector<std::vector<StrategyRunStat>>& coverage,
                             const std::string& template_version);

void write_scores_jsonl(const std::vector<ScoreRow>& rows, const std::filesystem::path& file);
std::vector<ScoreRow> read_scores_jsonl(const std::filesystem::path& file);

// Writes report.csv, report.md, scores.jsonl and config.resolved under
// config.output_dir.
void emit_report_files(const ExperimentConfig& config, const ExperimentOutcome& outcome);

} // namespace mmrec
