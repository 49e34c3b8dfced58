// Acceptance checks for the evaluation harness. Each criterion prints exactly
// one [PASS]/[FAIL] line ([SKIP] for the optional live-backend smoke); the
// process exits non-zero if any criterion fails.

#include "json.hpp"
#include "mmrec/config.hpp"
#include "mmrec/corpus.hpp"
#include "mmrec/error.hpp"
#include "mmrec/metrics.hpp"
#include "mmrec/mock.hpp"
#include "mmrec/prompting.hpp"
#include "mmrec/ranking_parser.hpp"
#include "mmrec/report.hpp"
#include "mmrec/rng.hpp"
#include "mmrec/runner.hpp"
#include "support/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace mmrec;
namespace fs = std::filesystem;

#define EXPECT(cond, msg)          \
    do {                           \
        if (!(cond)) {             \
            detail = (msg);        \
            return false;          \
        }                          \
    } while (0)

namespace {

int failures = 0;

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

template <typename F>
void criterion(int num, const char* label, F&& body) {
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& ex) {
        detail = ex.what();
        ok = false;
    }
    if (ok) {
        std::printf("[PASS] criterion %d: %s\n", num, label);
    } else {
        ++failures;
        std::printf("[FAIL] criterion %d: %s%s%s\n", num, label, detail.empty() ? "" : " - ",
                    detail.c_str());
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// --- criterion 1: dataset statistics reproduce published scales ------------

bool check_sparsity(std::string& detail) {
    struct Row {
        std::size_t users, items, interactions;
        double sparsity_pct;
    };
    const std::vector<Row> rows = {
        {200, 1750, 2333, 99.33},
        {200, 1291, 1362, 99.47},
        {200, 2024, 2797, 99.31},
        {200, 1684, 1967, 99.42},
    };
    Stopwatch timer;
    Catalog empty_catalog;
    for (const Row& row : rows) {
        auto sequences = synth::scaled_sequences(row.users, row.items, row.interactions);
        DatasetStats stats = compute_stats(sequences, empty_catalog);
        EXPECT(stats.users == row.users, "user count mismatch");
        EXPECT(stats.items == row.items, "item count mismatch");
        EXPECT(stats.interactions == row.interactions, "interaction count mismatch");
        const double pct = stats.sparsity * 100.0;
        EXPECT(std::fabs(pct - row.sparsity_pct) <= 0.005,
               "sparsity " + fmt(pct) + " deviates from " + fmt(row.sparsity_pct) +
                   " by more than 0.005");
        const std::string csv = stats_csv(stats);
        char expect[32];
        std::snprintf(expect, sizeof expect, ",%.2f\n", row.sparsity_pct);
        EXPECT(csv.find(expect) != std::string::npos, "stats csv does not round to " +
                                                          std::string(expect));
    }
    EXPECT(timer.seconds() < 1.0, "took " + fmt(timer.seconds()) + "s (budget 1s)");
    return true;
}

// --- criterion 2: canonical prompt phrasing ---------------------------------

bool check_phrasing(std::string& detail) {
    const std::vector<std::string> phrases = {
        "What's in this image?",
        "Here is a chronological list of my purchase history",
        "You cannot generate products that are not in the given candidate list",
        "Please think step by step.",
        "What information can you get from the title?",
        "This is an image related to",
    };

    HistoryEntryView entry;
    entry.title = "Blue Mug";
    entry.image_ref = "data:image/png;base64,QQ==";
    entry.visual_summary = "a mug";
    entry.title_summary = "a vessel";
    std::vector<HistoryEntryView> history = {entry, entry};
    std::vector<std::string> candidates = {"A", "B", "C"};

    std::string rendered;
    rendered += render_summary_prompt(entry, StrategyId::VST).joined_text() + "\n";
    rendered += render_summary_prompt(entry, StrategyId::TitleBased_VST).joined_text() + "\n";
    rendered += render_title_summary_prompt(entry).joined_text() + "\n";
    for (StrategyId s : all_strategies())
        rendered += render_ranking_prompt(s, history, candidates).joined_text() + "\n";

    for (const auto& phrase : phrases)
        EXPECT(rendered.find(phrase) != std::string::npos,
               "rendered prompts lack the exact phrase: " + phrase);

    std::ifstream in(MMREC_TEMPLATE_FILE);
    EXPECT(in.good(), std::string("cannot open shipped template catalog ") + MMREC_TEMPLATE_FILE);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string shipped = buf.str();
    for (const auto& phrase : phrases)
        EXPECT(shipped.find(phrase) != std::string::npos,
               "shipped template catalog lacks the exact phrase: " + phrase);

    TemplateCatalog parsed = catalog_from_text(shipped);
    EXPECT(catalog_to_text(parsed) == catalog_to_text(default_catalog()),
           "shipped template catalog disagrees with the built-in defaults");
    return true;
}

// --- criterion 3: exhaustive metric cross-check ------------------------------

bool check_metric_table(std::string& detail) {
    Stopwatch timer;
    const std::vector<int> ks = {1, 2, 3, 4, 5};
    std::vector<int> perm = {0, 1, 2, 3, 4};
    int permutations = 0;
    do {
        for (int target = 0; target < 5; ++target) {
            int rank = 0;
            for (int pos = 0; pos < 5; ++pos)
                if (perm[static_cast<std::size_t>(pos)] == target) rank = pos + 1;
            InstanceScore s = score_instance(perm, target, ks);
            EXPECT(s.target_rank == rank, "target_rank mismatch");
            for (int k : ks) {
                const double recall = rank <= k ? 1.0 : 0.0;
                const double ndcg =
                    rank <= k ? 1.0 / std::log2(static_cast<double>(rank) + 1.0) : 0.0;
                EXPECT(s.recall_at.at(k) == recall, "recall differs from the definition");
                EXPECT(s.ndcg_at.at(k) == ndcg, "ndcg differs from the definition");
            }
        }
        ++permutations;
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT(permutations == 120, "expected 120 permutations");
    EXPECT(timer.seconds() < 1.0, "took " + fmt(timer.seconds()) + "s (budget 1s)");
    return true;
}

// --- criterion 4: oracle backend scores perfectly across strategies ----------

bool check_oracle(std::string& detail) {
    fs::path dir = synth::fresh_dir("acceptance_oracle");
    synth::CorpusSpec spec;
    spec.users = 220;
    auto files = synth::write_corpus(dir, spec);

    ExperimentConfig cfg = synth::base_config(files, dir);
    cfg.user_count = 200;
    cfg.strategies = all_strategies();
    cfg.k_list = {1, 5, 10};
    cfg.runs = 2;
    cfg.cache_dir.clear();

    RunOptions options;
    options.write_raw = false;
    ExperimentOutcome outcome = run_experiment(cfg, options);

    const std::size_t expected_rows = cfg.user_count * cfg.strategies.size() *
                                      static_cast<std::size_t>(cfg.runs);
    EXPECT(outcome.rows.size() == expected_rows,
           "expected " + std::to_string(expected_rows) + " scored rows, got " +
               std::to_string(outcome.rows.size()));

    for (const auto& row : outcome.rows) {
        EXPECT(row.target_rank == 1, "oracle reply did not rank the target first");
        for (int k : cfg.k_list) {
            EXPECT(row.recall.at(k) == 1.0, "recall below 1.0 under the oracle");
            EXPECT(row.ndcg.at(k) == 1.0, "ndcg below 1.0 under the oracle");
        }
    }
    for (const auto& cell : aggregate_grid(cfg, outcome.rows)) {
        EXPECT(cell.has_data, "grid cell without data");
        EXPECT(cell.mean == 1.0, "aggregated mean is not exactly 1.0");
        EXPECT(cell.stddev == 0.0, "aggregated stddev is not exactly 0.0");
        EXPECT(cell.excluded == 0, "oracle run excluded instances");
    }
    return true;
}

// --- criterion 5: uniform-random baseline matches expectation ----------------

bool check_uniform_baseline(std::string& detail) {
    Stopwatch timer;
    fs::path dir = synth::fresh_dir("acceptance_uniform");
    synth::CorpusSpec spec;
    spec.users = 220;
    auto files = synth::write_corpus(dir, spec);

    ExperimentConfig cfg = synth::base_config(files, dir);
    cfg.user_count = 200;
    cfg.strategies = {StrategyId::TitleOnly};
    cfg.n_candidates = 10;
    cfg.k_list = {5, 10};
    cfg.runs = 50;
    cfg.cache_dir.clear();
    cfg.backend.behavior = MockBehavior::UniformRandom;
    cfg.backend.mock_seed = 2024;

    RunOptions options;
    options.write_raw = false;
    ExperimentOutcome outcome = run_experiment(cfg, options);
    EXPECT(outcome.rows.size() == 200 * 50, "uniform baseline lost rows");

    auto grid = aggregate_grid(cfg, outcome.rows);
    auto cell = [&](char metric, int k) -> const CellAggregate& {
        for (const auto& c : grid)
            if (c.metric == metric && c.k == k) return c;
        throw Error("cell lookup failed");
    };

    const double r5 = cell('R', 5).mean;
    EXPECT(std::fabs(r5 - 0.5) <= 0.03,
           "R@5 = " + fmt(r5) + " outside 0.5 +/- 0.03 for uniform rankings");

    double expected_n10 = 0.0;
    for (int rank = 1; rank <= 10; ++rank)
        expected_n10 += 1.0 / std::log2(static_cast<double>(rank) + 1.0);
    expected_n10 /= 10.0;
    const double n10 = cell('N', 10).mean;
    EXPECT(std::fabs(n10 - expected_n10) <= 0.02,
           "N@10 = " + fmt(n10) + " outside " + fmt(expected_n10) + " +/- 0.02");

    EXPECT(timer.seconds() < 30.0, "took " + fmt(timer.seconds()) + "s (budget 30s)");
    return true;
}

// --- criterion 6: free-text parser fixture accuracy --------------------------

bool check_parser_fixtures(std::string& detail) {
    std::ifstream in(std::string(MMREC_FIXTURE_DIR) + "/parser_cases.jsonl");
    EXPECT(in.good(), "cannot open parser fixture corpus");

    int total = 0, exact = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json c = nlohmann::json::parse(line);
        ++total;
        const auto candidates = c.at("candidates").get<std::vector<std::string>>();
        const auto expect = c.at("expect").get<std::vector<int>>();
        ParsedRanking parsed = parse_ranking(c.at("text").get<std::string>(), candidates);
        if (parsed.indices == expect) ++exact;

        if (c.value("hallucinated_only", false)) {
            EXPECT(parsed.indices.empty(),
                   "hallucinated-only case \"" + c.at("name").get<std::string>() +
                       "\" matched a real candidate");
            EXPECT(parsed.hallucinated_count > 0,
                   "hallucinated-only case \"" + c.at("name").get<std::string>() +
                       "\" reported no hallucinations");
        }
    }
    EXPECT(total >= 40, "fixture corpus has only " + std::to_string(total) + " cases (need 40)");
    const double accuracy = static_cast<double>(exact) / static_cast<double>(total);
    EXPECT(accuracy >= 0.95, "exact recovery " + std::to_string(exact) + "/" +
                                 std::to_string(total) + " below 95%");
    return true;
}

// --- criterion 7: determinism under caching and completion order -------------

bool check_determinism(std::string& detail) {
    fs::path dir = synth::fresh_dir("acceptance_determinism");
    auto files = synth::write_corpus(dir, {});
    ExperimentConfig cfg = synth::base_config(files, dir);
    cfg.user_count = 12;
    cfg.strategies = {StrategyId::TitleOnly, StrategyId::MM, StrategyId::VST};

    ExperimentOutcome first = run_experiment(cfg);
    emit_report_files(cfg, first);
    const std::string csv1 = synth::read_file(fs::path(cfg.output_dir) / "report.csv");
    const std::string scores1 = synth::read_file(fs::path(cfg.output_dir) / "scores.jsonl");
    EXPECT(!csv1.empty() && !scores1.empty(), "first run produced empty reports");

    ExperimentConfig rerun = cfg;
    rerun.output_dir = (dir / "out_rerun").string();
    RunOptions warm;
    auto counting = make_mock_backend({});
    warm.backend = counting;
    ExperimentOutcome second = run_experiment(rerun, warm);
    emit_report_files(rerun, second);
    EXPECT(counting->calls() == 0, "warm-cache rerun still hit the backend");
    EXPECT(synth::read_file(fs::path(rerun.output_dir) / "report.csv") == csv1,
           "report.csv changed across a warm-cache rerun");
    EXPECT(synth::read_file(fs::path(rerun.output_dir) / "scores.jsonl") == scores1,
           "scores.jsonl changed across a warm-cache rerun");

    // Scrambled completion order (per-request delays, 4 workers) must produce
    // the same bytes as a serial pass.
    ExperimentConfig live = cfg;
    live.cache_dir.clear();
    MockSpec scrambled;
    scrambled.behavior = MockBehavior::UniformRandom;
    scrambled.seed = 77;
    scrambled.max_inflight = 4;
    scrambled.max_delay_ms = 10;
    MockSpec serial = scrambled;
    serial.max_inflight = 1;
    serial.max_delay_ms = 0;

    RunOptions opt_a;
    opt_a.backend = make_mock_backend(scrambled);
    opt_a.write_raw = false;
    RunOptions opt_b;
    opt_b.backend = make_mock_backend(serial);
    opt_b.write_raw = false;

    ExperimentOutcome a = run_experiment(live, opt_a);
    ExperimentOutcome b = run_experiment(live, opt_b);
    write_scores_jsonl(a.rows, dir / "order_a.jsonl");
    write_scores_jsonl(b.rows, dir / "order_b.jsonl");
    EXPECT(synth::read_file(dir / "order_a.jsonl") == synth::read_file(dir / "order_b.jsonl"),
           "completion order leaked into the scores");
    return true;
}

// --- criterion 8: rank-metric invariants --------------------------------------

bool check_metric_invariants(std::string& detail) {
    Rng rng(4242);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(11));
        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        shuffle_vec(perm, rng);
        const int target = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
        std::vector<int> ks(static_cast<std::size_t>(n));
        std::iota(ks.begin(), ks.end(), 1);

        InstanceScore s = score_instance(perm, target, ks);
        double prev_r = 0.0, prev_n = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double r = s.recall_at.at(k);
            const double nd = s.ndcg_at.at(k);
            EXPECT(r >= 0.0 && r <= 1.0, "recall out of [0,1]");
            EXPECT(nd >= 0.0 && nd <= 1.0, "ndcg out of [0,1]");
            EXPECT(r >= prev_r, "recall not monotone in K");
            EXPECT(nd >= prev_n, "ndcg not monotone in K");
            EXPECT(nd <= r, "ndcg exceeded recall");
            EXPECT((nd > 0.0) == (r == 1.0), "ndcg/recall hit disagreement");
            prev_r = r;
            prev_n = nd;
        }
        EXPECT(s.recall_at.at(n) == 1.0, "recall at n is not 1");
    }
    return true;
}

// --- criterion 9: optional live backend smoke ---------------------------------

bool check_live_smoke(const std::string& base_url, std::string& detail) {
    fs::path dir = synth::fresh_dir("acceptance_smoke");
    synth::CorpusSpec spec;
    spec.users = 10;
    spec.items = 60;
    auto files = synth::write_corpus(dir, spec);

    ExperimentConfig cfg = synth::base_config(files, dir);
    cfg.user_count = 5;
    cfg.runs = 1;
    cfg.strategies = {StrategyId::TitleOnly};
    cfg.backend.kind = "remote";
    cfg.backend.base_url = base_url;
    if (const char* model = std::getenv("MMREC_SMOKE_MODEL")) cfg.model_id = model;
    if (const char* key_env = std::getenv("MMREC_SMOKE_API_KEY_ENV"))
        cfg.backend.api_key_env = key_env;

    ExperimentOutcome outcome = run_experiment(cfg);
    EXPECT(outcome.rows.size() >= 4,
           "more than 20% of the 5 smoke users were excluded (" +
               std::to_string(outcome.rows.size()) + " scored)");
    emit_report_files(cfg, outcome);
    const std::string csv = synth::read_file(fs::path(cfg.output_dir) / "report.csv");
    EXPECT(csv.rfind("dataset,model,strategy,metric,k,mean,std,runs,users,excluded\n", 0) == 0,
           "smoke report.csv is malformed");
    return true;
}

} // namespace

int main() {
    criterion(1, "dataset statistics reproduce published sparsity scales", check_sparsity);
    criterion(2, "prompts carry the canonical phrasing byte for byte", check_phrasing);
    criterion(3, "rank metrics match the definition on every 5-candidate permutation",
              check_metric_table);
    criterion(4, "oracle backend scores 1.000 with zero spread on every strategy", check_oracle);
    criterion(5, "uniform-random baseline lands on its expected value", check_uniform_baseline);
    criterion(6, "free-text parser recovers at least 95% of fixture rankings",
              check_parser_fixtures);
    criterion(7, "results are byte-stable under caching and completion order",
              check_determinism);
    criterion(8, "rank-metric invariants hold on random permutations", check_metric_invariants);

    if (const char* base_url = std::getenv("MMREC_SMOKE_BASE_URL")) {
        const std::string url(base_url);
        criterion(9, "live backend smoke run",
                  [&](std::string& detail) { return check_live_smoke(url, detail); });
    } else {
        std::printf("[SKIP] criterion 9: live backend smoke run (MMREC_SMOKE_BASE_URL not set)\n");
    }

    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
