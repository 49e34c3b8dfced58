#include "mmrec/report.hpp"

#include "mmrec/error.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mmrec {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::size_t strategy_position(const ExperimentConfig& config, StrategyId strategy) {
    for (std::size_t i = 0; i < config.strategies.size(); ++i)
        if (config.strategies[i] == strategy) return i;
    throw Error("report: row strategy \"" + strategy_name(strategy) +
                "\" is not in the configured strategy list");
}

// rows grouped as [strategy position][run]
std::vector<std::vector<std::vector<const ScoreRow*>>> group_rows(
    const ExperimentConfig& config, const std::vector<ScoreRow>& rows) {
    std::vector<std::vector<std::vector<const ScoreRow*>>> grouped(
        config.strategies.size(),
        std::vector<std::vector<const ScoreRow*>>(static_cast<std::size_t>(config.runs)));
    for (const auto& row : rows) {
        if (row.run < 0 || row.run >= config.runs)
            throw Error("report: row run index " + std::to_string(row.run) +
                        " outside configured runs");
        grouped[strategy_position(config, row.strategy)][static_cast<std::size_t>(row.run)]
            .push_back(&row);
    }
    return grouped;
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string quoted = "\"";
    for (char c : value) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

void write_text(const fs::path& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("report: cannot write " + file.string());
    out << content;
    if (!out) throw Error("report: write failed for " + file.string());
}

} // namespace

std::vector<CellAggregate> aggregate_grid(const ExperimentConfig& config,
                                          const std::vector<ScoreRow>& rows) {
    const auto grouped = group_rows(config, rows);
    std::vector<CellAggregate> grid;
    grid.reserve(config.strategies.size() * 2 * config.k_list.size());

    for (std::size_t si = 0; si < config.strategies.size(); ++si) {
        for (char metric : {'R', 'N'}) {
            for (int k : config.k_list) {
                CellAggregate cell;
                cell.strategy = config.strategies[si];
                cell.metric = metric;
                cell.k = k;
                for (int run = 0; run < config.runs; ++run) {
                    const auto& bucket = grouped[si][static_cast<std::size_t>(run)];
                    double sum = 0.0;
                    std::size_t count = 0;
                    for (const ScoreRow* row : bucket) {
                        const auto& values = metric == 'R' ? row->recall : row->ndcg;
                        auto it = values.find(k);
                        if (it == values.end())
                            throw Error("report: row for user " + row->user_id +
                                        " lacks K=" + std::to_string(k));
                        sum += it->second;
                        ++count;
                    }
                    if (count > 0) cell.run_means.push_back(sum / static_cast<double>(count));
                    cell.users += count;
                    cell.excluded += config.user_count - count;
                }
                if (!cell.run_means.empty()) {
                    RunStat stat = aggregate_runs(cell.run_means);
                    cell.mean = stat.mean;
                    cell.stddev = stat.stddev;
                    cell.has_data = true;
                }
                grid.push_back(std::move(cell));
            }
        }
    }
    return grid;
}

std::vector<std::vector<StrategyRunStat>> tally_coverage(const ExperimentConfig& config,
                                                         const std::vector<ScoreRow>& rows) {
    const auto grouped = group_rows(config, rows);
    std::vector<std::vector<StrategyRunStat>> coverage(
        config.strategies.size(),
        std::vector<StrategyRunStat>(static_cast<std::size_t>(config.runs)));
    for (std::size_t si = 0; si < config.strategies.size(); ++si)
        for (int run = 0; run < config.runs; ++run) {
            const std::size_t scored = grouped[si][static_cast<std::size_t>(run)].size();
            coverage[si][static_cast<std::size_t>(run)] = {scored, config.user_count - scored};
        }
    return coverage;
}

std::string render_report_csv(const ExperimentConfig& config,
                              const std::vector<CellAggregate>& grid) {
    std::string out = "dataset,model,strategy,metric,k,mean,std,runs,users,excluded\n";
    char buf[80];
    for (const auto& cell : grid) {
        out += csv_field(config.dataset) + ',' + csv_field(config.model_id) + ',' +
               strategy_name(cell.strategy) + ',';
        out += cell.metric;
        out += ',' + std::to_string(cell.k) + ',';
        if (cell.has_data) {
            std::snprintf(buf, sizeof buf, "%.6f,%.6f", cell.mean, cell.stddev);
            out += buf;
        } else {
            out += "NA,NA";
        }
        out += ',' + std::to_string(config.runs) + ',' + std::to_string(cell.users) + ',' +
               std::to_string(cell.excluded) + '\n';
    }
    return out;
}

std::string render_report_md(const ExperimentConfig& config, const DatasetStats& stats,
                             const std::vector<CellAggregate>& grid,
                             const std::vector<std::vector<StrategyRunStat>>& coverage,
                             const std::string& template_version) {
    std::ostringstream os;
    char buf[80];

    os << "# Evaluation report: " << config.dataset << "\n\n";
    os << "Model `" << config.model_id << "`, " << config.runs << " run(s), "
       << config.n_candidates << " candidates per user, scoring mode `"
       << scoring_mode_name(config.scoring_mode) << "`.\n\n";

    os << "## Dataset\n\n";
    os << "| users | items | interactions | sparsity |\n";
    os << "|------:|------:|-------------:|---------:|\n";
    std::snprintf(buf, sizeof buf, "%.2f%%", stats.sparsity * 100.0);
    os << "| " << stats.users << " | " << stats.items << " | " << stats.interactions << " | "
       << buf << " |\n\n";

    os << "## Results\n\n";
    os << "Cells are mean (std) over runs; NA marks cells with no scored instances.\n\n";
    os << "| metric |";
    for (StrategyId s : config.strategies) os << ' ' << strategy_label(s) << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < config.strategies.size(); ++i) os << "---:|";
    os << '\n';

    auto find_cell = [&](StrategyId s, char metric, int k) -> const CellAggregate& {
        for (const auto& cell : grid)
            if (cell.strategy == s && cell.metric == metric && cell.k == k) return cell;
        throw Error("report: grid is missing a cell");
    };
    for (char metric : {'R', 'N'}) {
        for (int k : config.k_list) {
            os << "| " << metric << '@' << k << " |";
            for (StrategyId s : config.strategies) {
                const CellAggregate& cell = find_cell(s, metric, k);
                if (cell.has_data) {
                    std::snprintf(buf, sizeof buf, "%.4f (%.4f)", cell.mean, cell.stddev);
                    os << ' ' << buf << " |";
                } else {
                    os << " NA |";
                }
            }
            os << '\n';
        }
    }

    os << "\n## Notes\n\n";
    if (config.scoring_mode == ScoringMode::Completed) {
        os << "- Scoring mode `completed`: candidates missing from the parsed ranking are "
              "appended in candidate-list order before scoring.\n";
        bool saturated = false;
        for (int k : config.k_list)
            if (static_cast<std::size_t>(k) >= config.n_candidates) saturated = true;
        if (saturated)
            os << "- With " << config.n_candidates
               << " candidates, completed rankings make R@K constant at 1 for K >= "
               << config.n_candidates << ".\n";
    } else {
        os << "- Scoring mode `strict`: only parsed candidates are ranked; an unparsed target "
              "scores zero at every K.\n";
    }
    os << "- Template catalog version: " << template_version << ".\n";

    std::size_t total_excluded = 0;
    for (const auto& per_run : coverage)
        for (const auto& stat : per_run) total_excluded += stat.excluded;
    if (total_excluded == 0) {
        os << "- Exclusions: none; every sampled user was scored in every run.\n";
    } else {
        os << "- Exclusions (instances not scored, by strategy and run):\n";
        for (std::size_t si = 0; si < config.strategies.size(); ++si) {
            std::size_t strategy_total = 0;
            for (const auto& stat : coverage[si]) strategy_total += stat.excluded;
            if (strategy_total == 0) continue;
            os << "  - " << strategy_label(config.strategies[si]) << ':';
            for (std::size_t run = 0; run < coverage[si].size(); ++run)
                os << (run == 0 ? " " : ", ") << "run " << run << ": "
                   << coverage[si][run].excluded;
            os << '\n';
        }
    }
    return os.str();
}

void write_scores_jsonl(const std::vector<ScoreRow>& rows, const fs::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("report: cannot write " + file.string());
    for (const auto& row : rows) {
        ordered_json doc;
        doc["user_id"] = row.user_id;
        doc["run"] = row.run;
        doc["strategy"] = strategy_name(row.strategy);
        if (row.target_rank)
            doc["target_rank"] = *row.target_rank;
        else
            doc["target_rank"] = nullptr;
        ordered_json recall = ordered_json::object();
        for (const auto& [k, v] : row.recall) recall[std::to_string(k)] = v;
        ordered_json ndcg = ordered_json::object();
        for (const auto& [k, v] : row.ndcg) ndcg[std::to_string(k)] = v;
        doc["recall"] = std::move(recall);
        doc["ndcg"] = std::move(ndcg);
        out << doc.dump() << '\n';
    }
    if (!out) throw Error("report: write failed for " + file.string());
}

std::vector<ScoreRow> read_scores_jsonl(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("report: cannot open " + file.string());
    std::vector<ScoreRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json doc = ordered_json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object())
            throw SchemaError("report: " + file.string() + " line " + std::to_string(line_no) +
                              " is not a JSON object");
        ScoreRow row;
        row.user_id = doc.value("user_id", "");
        row.run = doc.value("run", 0);
        const std::string strategy = doc.value("strategy", "");
        auto parsed = parse_strategy(strategy);
        if (!parsed)
            throw SchemaError("report: " + file.string() + " line " + std::to_string(line_no) +
                              " has unknown strategy \"" + strategy + "\"");
        row.strategy = *parsed;
        if (doc.contains("target_rank") && !doc["target_rank"].is_null())
            row.target_rank = doc["target_rank"].get<int>();
        for (const char* name : {"recall", "ndcg"}) {
            if (!doc.contains(name) || !doc[name].is_object())
                throw SchemaError("report: " + file.string() + " line " +
                                  std::to_string(line_no) + " lacks " + name);
            auto& target = std::string(name) == "recall" ? row.recall : row.ndcg;
            for (const auto& [key, value] : doc[name].items())
                target[std::stoi(key)] = value.get<double>();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void emit_report_files(const ExperimentConfig& config, const ExperimentOutcome& outcome) {
    if (config.output_dir.empty()) throw Error("report: output_dir is not set");
    const fs::path out_dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error("report: cannot create " + out_dir.string() + ": " + ec.message());

    const auto grid = aggregate_grid(config, outcome.rows);
    const auto coverage = tally_coverage(config, outcome.rows);

    write_text(out_dir / "report.csv", render_report_csv(config, grid));
    write_text(out_dir / "report.md",
               render_report_md(config, outcome.stats, grid, coverage,
                                outcome.template_version));
    write_scores_jsonl(outcome.rows, out_dir / "scores.jsonl");
    write_text(out_dir / "config.resolved", config_to_json(config));
}

} // namespace mmrec
