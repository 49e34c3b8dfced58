#include "mmrec/runner.hpp"

#include "mmrec/cache.hpp"
#include "mmrec/digest.hpp"
#include "mmrec/encoding.hpp"
#include "mmrec/error.hpp"
#include "mmrec/mock.hpp"
#include "mmrec/prompting.hpp"
#include "mmrec/ranking_parser.hpp"
#include "mmrec/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

namespace mmrec {

namespace fs = std::filesystem;

namespace {

int worker_count(std::size_t jobs, int max_inflight) {
    auto n = static_cast<int>(std::min<std::size_t>(jobs, 32));
    return std::clamp(std::min(n, max_inflight), 1, 32);
}

// body must not throw; jobs record their own failures.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body) {
    if (count == 0) return;
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    for (auto& t : pool) t.join();
}

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const std::exception& ex) {
        throw Error(std::string(name) + " stage failed: " + ex.what());
    }
}

} // namespace

std::string titled_visual_key(const std::string& image_key, const std::string& title) {
    return sha256_hex(image_key + "\x1f" + title);
}

std::string title_key(const std::string& title) { return sha256_hex("title:" + title); }

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
    if (config.kind == "remote") {
        RemoteSpec spec;
        spec.base_url = config.base_url;
        spec.api_key_env = config.api_key_env;
        spec.timeout_s = config.timeout_s;
        spec.max_retries = config.max_retries;
        spec.max_inflight = config.max_inflight;
        spec.requests_per_minute = config.requests_per_minute;
        spec.initial_backoff_ms = config.initial_backoff_ms;
        return make_remote_backend(spec);
    }
    MockSpec spec;
    spec.behavior = config.behavior;
    spec.seed = config.mock_seed;
    spec.rate = config.hallucinate_rate;
    spec.format = config.malformed_format;
    spec.max_inflight = config.max_inflight;
    spec.max_delay_ms = config.mock_delay_ms;
    return make_mock_backend(spec);
}

std::string sanitize_user_id(const std::string& user_id) {
    std::string safe;
    bool changed = false;
    for (char c : user_id) {
        const bool ok =
            std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
        safe += ok ? c : '_';
        changed = changed || !ok;
    }
    if (safe.empty()) {
        safe = "_";
        changed = true;
    }
    if (changed) safe += "-" + sha256_hex(user_id).substr(0, 8);
    return safe;
}

SummaryStore run_summary_phase(const ExperimentConfig& config,
                               const std::vector<EvalInstance>& instances, Backend& backend,
                               const TemplateCatalog& catalog) {
    SummaryStore store;
    bool need_visual = false;
    bool need_titled = false;
    bool need_title = false;
    for (StrategyId s : config.strategies) {
        if (s == StrategyId::VST || s == StrategyId::VST_SummaryOnly ||
            s == StrategyId::TitleSum_VST)
            need_visual = true;
        if (needs_title_conditioned_summary(s)) need_titled = true;
        if (needs_title_summary(s)) need_title = true;
    }
    if (!need_visual && !need_titled && !need_title) return store;

    for (const auto& inst : instances)
        for (const auto& entry : inst.history) {
            if (!entry.image_ref) continue;
            const std::string& ref = *entry.image_ref;
            if (store.ref_key.count(ref) || store.failed_refs.count(ref)) continue;
            try {
                store.ref_key[ref] = image_content_key(ref);
            } catch (const std::exception& ex) {
                store.failed_refs.insert(ref);
                std::fprintf(stderr, "[summary] image unavailable (%s): %s\n", ref.c_str(),
                             ex.what());
            }
        }

    enum Variant { Visual = 0, VisualTitled = 1, Title = 2 };
    struct Job {
        int variant;
        std::string key;
        ChatRequest request;
    };
    std::vector<Job> jobs;
    std::set<std::string> queued;

    DecodingParams decoding;
    decoding.temperature = 0.0;
    decoding.max_tokens = config.max_tokens;

    auto add = [&](int variant, const std::string& key, RenderedPrompt prompt) {
        if (!queued.insert(std::to_string(variant) + ":" + key).second) return;
        ChatRequest request;
        request.model_id = config.model_id;
        request.parts = std::move(prompt.parts);
        request.decoding = decoding;
        jobs.push_back({variant, key, std::move(request)});
    };

    for (const auto& inst : instances)
        for (const auto& entry : inst.history) {
            HistoryEntryView view{entry.title, entry.image_ref, std::nullopt, std::nullopt};
            if (entry.image_ref) {
                auto it = store.ref_key.find(*entry.image_ref);
                if (it != store.ref_key.end()) {
                    const std::string& image_key = it->second;
                    if (need_visual)
                        add(Visual, image_key, render_summary_prompt(view, StrategyId::VST, catalog));
                    if (need_titled)
                        add(VisualTitled, titled_visual_key(image_key, entry.title),
                            render_summary_prompt(view, StrategyId::TitleBased_VST, catalog));
                }
            }
            if (need_title)
                add(Title, title_key(entry.title), render_title_summary_prompt(view, catalog));
        }

    std::mutex mutex;
    parallel_for(jobs.size(), worker_count(jobs.size(), backend.max_inflight()),
                 [&](std::size_t i) {
                     Job& job = jobs[i];
                     try {
                         CompletionResult result = backend.complete(job.request);
                         std::lock_guard lock(mutex);
                         auto& pool = job.variant == Visual         ? store.visual
                                      : job.variant == VisualTitled ? store.visual_titled
                                                                    : store.title;
                         pool[job.key] = std::move(result.text);
                     } catch (const std::exception& ex) {
                         std::lock_guard lock(mutex);
                         store.failed_keys.insert(job.key);
                         std::fprintf(stderr, "[summary] request failed: %s\n", ex.what());
                     }
                 });
    return store;
}

namespace {

std::optional<std::vector<HistoryEntryView>> build_views(const EvalInstance& inst,
                                                         StrategyId strategy,
                                                         const SummaryStore& summaries,
                                                         std::string& reason) {
    std::vector<HistoryEntryView> views;
    views.reserve(inst.history.size());
    for (const auto& entry : inst.history) {
        HistoryEntryView view;
        view.title = entry.title;
        view.image_ref = entry.image_ref;
        if (is_vst_family(strategy)) {
            if (!entry.image_ref) {
                reason = "history item \"" + entry.title + "\" has no image";
                return std::nullopt;
            }
            auto key_it = summaries.ref_key.find(*entry.image_ref);
            if (key_it == summaries.ref_key.end()) {
                reason = "image for \"" + entry.title + "\" did not resolve";
                return std::nullopt;
            }
            const bool titled = needs_title_conditioned_summary(strategy);
            const std::string summary_key =
                titled ? titled_visual_key(key_it->second, entry.title) : key_it->second;
            const auto& pool = titled ? summaries.visual_titled : summaries.visual;
            auto summary_it = pool.find(summary_key);
            if (summary_it == pool.end()) {
                reason = "visual summary for \"" + entry.title + "\" unavailable";
                return std::nullopt;
            }
            view.visual_summary = summary_it->second;
            if (needs_title_summary(strategy)) {
                auto title_it = summaries.title.find(title_key(entry.title));
                if (title_it == summaries.title.end()) {
                    reason = "title summary for \"" + entry.title + "\" unavailable";
                    return std::nullopt;
                }
                view.title_summary = title_it->second;
            }
        }
        views.push_back(std::move(view));
    }
    return views;
}

} // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    validate_config(config);
    const TemplateCatalog& catalog = default_catalog();

    LoadResult corpus = stage("corpus", [&] {
        return load_corpus(config.interactions_path, config.catalog_path);
    });
    std::vector<UserSequence> sampled = stage("sample", [&] {
        return sample_users(corpus.sequences, config.user_count, config.sample_seed);
    });

    ExperimentOutcome outcome;
    outcome.stats = compute_stats(sampled, corpus.catalog);
    outcome.template_version = catalog.version;

    std::shared_ptr<Backend> backend =
        options.backend ? options.backend : make_backend(config.backend);
    if (!config.cache_dir.empty()) backend = with_cache(backend, config.cache_dir);

    const std::vector<long long> run_seeds = effective_run_seeds(config);
    const int n = static_cast<int>(config.n_candidates);

    std::vector<EvalInstance> base = stage("instances", [&] {
        return build_eval_instances(sampled, corpus.catalog, n, config.sample_seed);
    });

    const bool any_summary =
        std::any_of(config.strategies.begin(), config.strategies.end(), has_summary_phase);
    SummaryStore summaries;
    if (any_summary)
        summaries = stage("summaries",
                          [&] { return run_summary_phase(config, base, *backend, catalog); });

    const bool write_raw = options.write_raw && !config.output_dir.empty();
    RenderOptions render_opts;
    render_opts.history_cap = config.history_cap;

    for (int run = 0; run < config.runs; ++run) {
        std::vector<EvalInstance> resampled;
        const std::vector<EvalInstance>* instances = &base;
        if (config.resample_negatives_per_run && run > 0) {
            resampled = stage("instances", [&] {
                return build_eval_instances(
                    sampled, corpus.catalog, n,
                    mix_seed(config.sample_seed, 0x72756e00ULL + static_cast<uint64_t>(run)));
            });
            instances = &resampled;
        }

        for (StrategyId strategy : config.strategies) {
            fs::path raw_dir;
            if (write_raw) {
                raw_dir = fs::path(config.output_dir) / "raw" / strategy_name(strategy) /
                          std::to_string(run);
                fs::create_directories(raw_dir);
            }

            std::vector<std::optional<std::string>> texts(instances->size());
            std::vector<std::string> failures(instances->size());

            parallel_for(
                instances->size(), worker_count(instances->size(), backend->max_inflight()),
                [&](std::size_t i) {
                    const EvalInstance& inst = (*instances)[i];
                    std::string reason;
                    auto views = build_views(inst, strategy, summaries, reason);
                    if (!views) {
                        failures[i] = reason;
                        return;
                    }
                    try {
                        RenderedPrompt prompt = render_ranking_prompt(
                            strategy, *views, inst.candidates, render_opts, catalog);
                        ChatRequest request;
                        request.model_id = config.model_id;
                        request.parts = std::move(prompt.parts);
                        request.decoding.temperature = config.temperature;
                        request.decoding.max_tokens = config.max_tokens;
                        request.decoding.seed = run_seeds[static_cast<std::size_t>(run)];
                        request.hint = RankingHint{inst.candidates, inst.target_index};
                        texts[i] = backend->complete(request).text;
                    } catch (const std::exception& ex) {
                        failures[i] = ex.what();
                    }
                });

            for (std::size_t i = 0; i < instances->size(); ++i) {
                const EvalInstance& inst = (*instances)[i];
                if (!texts[i]) {
                    std::fprintf(stderr, "[runner] excluded %s (%s, run %d): %s\n",
                                 inst.user_id.c_str(), strategy_name(strategy).c_str(), run,
                                 failures[i].c_str());
                    continue;
                }
                if (write_raw) {
                    std::ofstream out(raw_dir / (sanitize_user_id(inst.user_id) + ".txt"),
                                      std::ios::binary | std::ios::trunc);
                    out << *texts[i];
                }

                ParsedRanking parsed = parse_ranking(*texts[i], inst.candidates);
                InstanceScore score;
                if (config.scoring_mode == ScoringMode::Completed) {
                    CompletedRanking completed = complete_ranking(parsed, n);
                    score = score_instance(completed.order, inst.target_index, config.k_list);
                } else {
                    score = score_parsed_strict(parsed.indices, inst.target_index, config.k_list);
                }

                ScoreRow row;
                row.user_id = inst.user_id;
                row.run = run;
                row.strategy = strategy;
                row.target_rank = score.target_rank;
                row.recall = std::move(score.recall_at);
                row.ndcg = std::move(score.ndcg_at);
                outcome.rows.push_back(std::move(row));
            }
        }
    }
    return outcome;
}

} // namespace mmrec
