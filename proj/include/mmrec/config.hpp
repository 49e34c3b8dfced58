#pragma once

#include "mmrec/mock.hpp"
#include "mmrec/prompting.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mmrec {

enum class ScoringMode { Completed, Strict };

std::string scoring_mode_name(ScoringMode mode);
std::optional<ScoringMode> parse_scoring_mode(std::string_view name);

struct BackendConfig {
    std::string kind = "mock"; // "remote" | "mock"

    // remote
    std::string base_url;
    std::string api_key_env = "MMREC_API_KEY";
    int timeout_s = 120;
    int max_retries = 3;
    int max_inflight = 4;
    double requests_per_minute = 0;
    int initial_backoff_ms = 500;

    // mock
    MockBehavior behavior = MockBehavior::Oracle;
    std::uint64_t mock_seed = 0;
    double hallucinate_rate = 1.0;
    MalformedFormat malformed_format = MalformedFormat::Prose;
    int mock_delay_ms = 0;
};

struct ExperimentConfig {
    std::string dataset = "dataset";
    std::string interactions_path;
    std::string catalog_path;
    std::size_t user_count = 200;
    std::uint64_t sample_seed = 7;
    std::size_t n_candidates = 10;
    std::vector<StrategyId> strategies;
    std::string model_id = "gpt-4-vision-preview";
    BackendConfig backend;
    std::vector<int> k_list = {5, 10, 20};
    int runs = 3;
    std::vector<long long> run_seeds; // defaults to sample_seed + 1 + run index
    ScoringMode scoring_mode = ScoringMode::Completed;
    std::string cache_dir = "cache";
    std::string output_dir = "out";
    std::size_t history_cap = 15;
    double temperature = 0.0;
    int max_tokens = 512;
    bool resample_negatives_per_run = false;
};

// Reads a JSON config file; relative paths resolve against the file's
// directory. Missing fields take the defaults above.
ExperimentConfig load_config(const std::filesystem::path& path);

void validate_config(const ExperimentConfig& config);

// run_seeds from the config, or sample_seed + 1 + run index when unset.
std::vector<long long> effective_run_seeds(const ExperimentConfig& config);

std::string config_to_json(const ExperimentConfig& config);

std::string mock_behavior_name(MockBehavior behavior);
std::optional<MockBehavior> parse_mock_behavior(std::string_view name);
std::string malformed_format_name(MalformedFormat format);
std::optional<MalformedFormat> parse_malformed_format(std::string_view name);

} // namespace mmrec
