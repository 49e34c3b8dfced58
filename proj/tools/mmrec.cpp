#include "mmrec/cache.hpp"
#include "mmrec/config.hpp"
#include "mmrec/corpus.hpp"
#include "mmrec/error.hpp"
#include "mmrec/report.hpp"
#include "mmrec/runner.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace mmrec;

namespace {

struct Overrides {
    std::vector<std::string> strategies;
    std::string backend_url;
    std::string model;
    int runs = 0;
    long long seed = 0;
    bool seed_set = false;
    std::vector<int> k_values;
    std::string cache_dir;
    bool cache_dir_set = false;
    std::string out_dir;
    std::string scoring_mode;
    std::string mock;
};

void add_common_options(CLI::App* cmd, std::string& config_path, Overrides& ov) {
    cmd->add_option("--config", config_path, "JSON experiment config")->required();
    cmd->add_option("--strategy", ov.strategies,
                    "strategy override, repeatable (title_only, mm, mm_icl, mm_cot, vst, "
                    "vst_summary_only, title_sum_vst, title_based_vst)");
    cmd->add_option("--backend-url", ov.backend_url, "use a remote backend at this base URL");
    cmd->add_option("--model", ov.model, "model id override");
    cmd->add_option("--runs", ov.runs, "number of repeated runs");
    cmd->add_option("--seed", ov.seed, "sampling seed override")
        ->each([&](const std::string&) { ov.seed_set = true; });
    cmd->add_option("--k", ov.k_values, "cutoff K, repeatable");
    cmd->add_option("--cache-dir", ov.cache_dir, "response cache directory (empty disables)")
        ->each([&](const std::string&) { ov.cache_dir_set = true; });
    cmd->add_option("--out", ov.out_dir, "output directory override");
    cmd->add_option("--scoring-mode", ov.scoring_mode, "completed or strict");
    cmd->add_option("--mock", ov.mock,
                    "use a mock backend: oracle, random, hallucinate or malformed");
}

std::string resolve_cli_path(const std::string& p) {
    if (p.empty()) return p;
    fs::path path(p);
    if (path.is_absolute()) return path.lexically_normal().string();
    return (fs::current_path() / path).lexically_normal().string();
}

ExperimentConfig load_with_overrides(const std::string& config_path, const Overrides& ov) {
    ExperimentConfig cfg = load_config(config_path);

    if (!ov.strategies.empty()) {
        cfg.strategies.clear();
        for (const auto& name : ov.strategies) {
            auto strategy = parse_strategy(name);
            if (!strategy) throw Error("unknown strategy \"" + name + "\"");
            cfg.strategies.push_back(*strategy);
        }
    }
    if (!ov.backend_url.empty()) {
        cfg.backend.kind = "remote";
        cfg.backend.base_url = ov.backend_url;
    }
    if (!ov.mock.empty()) {
        auto behavior = parse_mock_behavior(ov.mock);
        if (!behavior) throw Error("unknown mock behavior \"" + ov.mock + "\"");
        cfg.backend.kind = "mock";
        cfg.backend.behavior = *behavior;
    }
    if (!ov.model.empty()) cfg.model_id = ov.model;
    if (ov.runs > 0) {
        cfg.runs = ov.runs;
        cfg.run_seeds.clear();
    }
    if (ov.seed_set) {
        cfg.sample_seed = static_cast<std::uint64_t>(ov.seed);
        cfg.run_seeds.clear();
    }
    if (!ov.k_values.empty()) cfg.k_list = ov.k_values;
    if (ov.cache_dir_set) cfg.cache_dir = resolve_cli_path(ov.cache_dir);
    if (!ov.out_dir.empty()) cfg.output_dir = resolve_cli_path(ov.out_dir);
    if (!ov.scoring_mode.empty()) {
        auto mode = parse_scoring_mode(ov.scoring_mode);
        if (!mode) throw Error("unknown scoring mode \"" + ov.scoring_mode + "\"");
        cfg.scoring_mode = *mode;
    }
    validate_config(cfg);
    return cfg;
}

int cmd_stats(const ExperimentConfig& cfg) {
    LoadResult corpus = load_corpus(cfg.interactions_path, cfg.catalog_path);
    auto sampled = sample_users(corpus.sequences, cfg.user_count, cfg.sample_seed);
    std::cout << stats_csv(compute_stats(sampled, corpus.catalog));
    return 0;
}

int cmd_summarize(const ExperimentConfig& cfg) {
    LoadResult corpus = load_corpus(cfg.interactions_path, cfg.catalog_path);
    auto sampled = sample_users(corpus.sequences, cfg.user_count, cfg.sample_seed);
    auto instances = build_eval_instances(sampled, corpus.catalog,
                                          static_cast<int>(cfg.n_candidates), cfg.sample_seed);

    std::shared_ptr<Backend> backend = make_backend(cfg.backend);
    if (!cfg.cache_dir.empty()) backend = with_cache(backend, cfg.cache_dir);
    SummaryStore store = run_summary_phase(cfg, instances, *backend);

    if (!cfg.output_dir.empty()) {
        fs::create_directories(cfg.output_dir);
        std::ofstream out(fs::path(cfg.output_dir) / "summaries.jsonl",
                          std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write summaries.jsonl under " + cfg.output_dir);
        auto dump = [&](const char* variant, const std::map<std::string, std::string>& pool) {
            for (const auto& [key, text] : pool) {
                nlohmann::ordered_json doc = {{"variant", variant}, {"key", key}, {"text", text}};
                out << doc.dump() << '\n';
            }
        };
        dump("visual", store.visual);
        dump("visual_titled", store.visual_titled);
        dump("title", store.title);
    }
    std::cout << "summaries: " << store.visual.size() << " visual, "
              << store.visual_titled.size() << " title-conditioned, " << store.title.size()
              << " title-only; failures: " << store.failed_refs.size() + store.failed_keys.size()
              << "\n";
    return 0;
}

int cmd_rank(const ExperimentConfig& cfg) {
    ExperimentOutcome outcome = run_experiment(cfg);
    if (!cfg.output_dir.empty()) {
        fs::create_directories(cfg.output_dir);
        write_scores_jsonl(outcome.rows, fs::path(cfg.output_dir) / "scores.jsonl");
        std::ofstream out(fs::path(cfg.output_dir) / "config.resolved",
                          std::ios::binary | std::ios::trunc);
        out << config_to_json(cfg);
    }
    std::cout << "scored rows: " << outcome.rows.size() << "\n";
    return 0;
}

int cmd_report(const ExperimentConfig& cfg) {
    LoadResult corpus = load_corpus(cfg.interactions_path, cfg.catalog_path);
    auto sampled = sample_users(corpus.sequences, cfg.user_count, cfg.sample_seed);

    ExperimentOutcome outcome;
    outcome.stats = compute_stats(sampled, corpus.catalog);
    outcome.template_version = default_catalog().version;
    outcome.rows = read_scores_jsonl(fs::path(cfg.output_dir) / "scores.jsonl");
    emit_report_files(cfg, outcome);
    std::cout << "report written to " << (fs::path(cfg.output_dir) / "report.md").string()
              << "\n";
    return 0;
}

int cmd_run(const ExperimentConfig& cfg) {
    ExperimentOutcome outcome = run_experiment(cfg);
    emit_report_files(cfg, outcome);
    const auto grid = aggregate_grid(cfg, outcome.rows);
    for (const auto& cell : grid) {
        if (!cell.has_data) continue;
        std::printf("%-16s %c@%-3d %.4f (%.4f)\n", strategy_name(cell.strategy).c_str(),
                    cell.metric, cell.k, cell.mean, cell.stddev);
    }
    std::cout << "report written to " << (fs::path(cfg.output_dir) / "report.md").string()
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reranking evaluation harness for multimodal recommendation prompts"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;

    CLI::App* stats = app.add_subcommand("stats", "dataset statistics after user sampling");
    CLI::App* summarize = app.add_subcommand("summarize", "run only the image summary phase");
    CLI::App* rank = app.add_subcommand("rank", "run the pipeline and write per-user scores");
    CLI::App* report = app.add_subcommand("report", "aggregate existing scores into reports");
    CLI::App* run = app.add_subcommand("run", "full pipeline: rank and report");
    for (CLI::App* cmd : {stats, summarize, rank, report, run})
        add_common_options(cmd, config_path, ov);

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg = load_with_overrides(config_path, ov);
        if (app.got_subcommand(stats)) return cmd_stats(cfg);
        if (app.got_subcommand(summarize)) return cmd_summarize(cfg);
        if (app.got_subcommand(rank)) return cmd_rank(cfg);
        if (app.got_subcommand(report)) return cmd_report(cfg);
        return cmd_run(cfg);
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
}
