#include "mmrec/config.hpp"

#include "mmrec/error.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace mmrec {

namespace fs = std::filesystem;
using nlohmann::json;

std::string scoring_mode_name(ScoringMode mode) {
    return mode == ScoringMode::Completed ? "completed" : "strict";
}

std::optional<ScoringMode> parse_scoring_mode(std::string_view name) {
    if (name == "completed") return ScoringMode::Completed;
    if (name == "strict") return ScoringMode::Strict;
    return std::nullopt;
}

std::string mock_behavior_name(MockBehavior behavior) {
    switch (behavior) {
        case MockBehavior::Oracle: return "oracle";
        case MockBehavior::UniformRandom: return "random";
        case MockBehavior::Hallucinate: return "hallucinate";
        case MockBehavior::Malformed: return "malformed";
    }
    return "?";
}

std::optional<MockBehavior> parse_mock_behavior(std::string_view name) {
    if (name == "oracle") return MockBehavior::Oracle;
    if (name == "random") return MockBehavior::UniformRandom;
    if (name == "hallucinate") return MockBehavior::Hallucinate;
    if (name == "malformed") return MockBehavior::Malformed;
    return std::nullopt;
}

std::string malformed_format_name(MalformedFormat format) {
    switch (format) {
        case MalformedFormat::Prose: return "prose";
        case MalformedFormat::Json: return "json";
        case MalformedFormat::Punct: return "punct";
    }
    return "?";
}

std::optional<MalformedFormat> parse_malformed_format(std::string_view name) {
    if (name == "prose") return MalformedFormat::Prose;
    if (name == "json") return MalformedFormat::Json;
    if (name == "punct") return MalformedFormat::Punct;
    return std::nullopt;
}

namespace {

std::string resolve_path(const fs::path& base, const std::string& p) {
    if (p.empty()) return p;
    fs::path path(p);
    if (path.is_absolute()) return path.lexically_normal().string();
    return (base / path).lexically_normal().string();
}

void parse_backend(const json& node, BackendConfig& out) {
    if (!node.is_object()) throw SchemaError("config: backend must be an object");
    out.kind = node.value("kind", out.kind);
    if (out.kind != "remote" && out.kind != "mock")
        throw SchemaError("config: backend.kind must be \"remote\" or \"mock\"");

    out.base_url = node.value("base_url", out.base_url);
    out.api_key_env = node.value("api_key_env", out.api_key_env);
    out.timeout_s = node.value("timeout_s", out.timeout_s);
    out.max_retries = node.value("max_retries", out.max_retries);
    out.max_inflight = node.value("max_inflight", out.max_inflight);
    out.requests_per_minute = node.value("requests_per_minute", out.requests_per_minute);
    out.initial_backoff_ms = node.value("initial_backoff_ms", out.initial_backoff_ms);

    if (node.contains("behavior")) {
        const std::string name = node["behavior"].get<std::string>();
        auto behavior = parse_mock_behavior(name);
        if (!behavior) throw SchemaError("config: unknown mock behavior \"" + name + "\"");
        out.behavior = *behavior;
    }
    out.mock_seed = node.value("seed", out.mock_seed);
    out.hallucinate_rate = node.value("rate", out.hallucinate_rate);
    if (node.contains("format")) {
        const std::string name = node["format"].get<std::string>();
        auto format = parse_malformed_format(name);
        if (!format) throw SchemaError("config: unknown malformed format \"" + name + "\"");
        out.malformed_format = *format;
    }
    out.mock_delay_ms = node.value("delay_ms", out.mock_delay_ms);
}

} // namespace

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("config: cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();

    json doc;
    try {
        doc = json::parse(buf.str());
    } catch (const json::exception& e) {
        throw SchemaError("config: " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw SchemaError("config: top level must be an object");

    ExperimentConfig cfg;
    const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");

    cfg.dataset = doc.value("dataset", cfg.dataset);
    cfg.interactions_path = resolve_path(base, doc.value("interactions", std::string()));
    cfg.catalog_path = resolve_path(base, doc.value("catalog", std::string()));

    if (doc.contains("user_sample")) {
        const json& sample = doc["user_sample"];
        cfg.user_count = sample.value("count", cfg.user_count);
        cfg.sample_seed = sample.value("seed", cfg.sample_seed);
    }
    cfg.n_candidates = doc.value("n_candidates", cfg.n_candidates);

    if (doc.contains("strategies")) {
        if (!doc["strategies"].is_array())
            throw SchemaError("config: strategies must be an array");
        for (const auto& node : doc["strategies"]) {
            const std::string name = node.get<std::string>();
            auto strategy = parse_strategy(name);
            if (!strategy) throw SchemaError("config: unknown strategy \"" + name + "\"");
            cfg.strategies.push_back(*strategy);
        }
    }

    cfg.model_id = doc.value("model", cfg.model_id);
    if (doc.contains("backend")) parse_backend(doc["backend"], cfg.backend);

    if (doc.contains("k_list")) {
        cfg.k_list.clear();
        for (const auto& node : doc["k_list"]) cfg.k_list.push_back(node.get<int>());
    }
    cfg.runs = doc.value("runs", cfg.runs);
    if (doc.contains("run_seeds")) {
        for (const auto& node : doc["run_seeds"]) cfg.run_seeds.push_back(node.get<long long>());
    }
    if (doc.contains("scoring_mode")) {
        const std::string name = doc["scoring_mode"].get<std::string>();
        auto mode = parse_scoring_mode(name);
        if (!mode) throw SchemaError("config: unknown scoring_mode \"" + name + "\"");
        cfg.scoring_mode = *mode;
    }
    cfg.cache_dir = resolve_path(base, doc.value("cache_dir", cfg.cache_dir));
    cfg.output_dir = resolve_path(base, doc.value("output_dir", cfg.output_dir));
    cfg.history_cap = doc.value("history_cap", cfg.history_cap);
    if (doc.contains("decoding")) {
        const json& dec = doc["decoding"];
        cfg.temperature = dec.value("temperature", cfg.temperature);
        cfg.max_tokens = dec.value("max_tokens", cfg.max_tokens);
    }
    cfg.resample_negatives_per_run =
        doc.value("resample_negatives_per_run", cfg.resample_negatives_per_run);

    return cfg;
}

void validate_config(const ExperimentConfig& config) {
    if (config.interactions_path.empty()) throw Error("config: interactions path is required");
    if (config.catalog_path.empty()) throw Error("config: catalog path is required");
    if (config.strategies.empty()) throw Error("config: at least one strategy is required");
    if (config.n_candidates < 2) throw Error("config: n_candidates must be at least 2");
    if (config.runs < 1) throw Error("config: runs must be at least 1");
    if (!config.run_seeds.empty() &&
        config.run_seeds.size() != static_cast<std::size_t>(config.runs))
        throw Error("config: run_seeds must have exactly one seed per run");
    if (config.k_list.empty()) throw Error("config: k_list must be non-empty");
    for (int k : config.k_list)
        if (k < 1) throw Error("config: every K must be at least 1");
    if (config.backend.kind == "remote" && config.backend.base_url.empty())
        throw Error("config: remote backend needs base_url");
    if (config.backend.max_inflight < 1) throw Error("config: max_inflight must be at least 1");
    if (config.backend.hallucinate_rate < 0 || config.backend.hallucinate_rate > 1)
        throw Error("config: hallucinate rate must be in [0,1]");
    if (config.max_tokens < 1) throw Error("config: max_tokens must be positive");
    if (config.temperature < 0) throw Error("config: temperature must be non-negative");
}

std::vector<long long> effective_run_seeds(const ExperimentConfig& config) {
    if (!config.run_seeds.empty()) return config.run_seeds;
    std::vector<long long> seeds;
    seeds.reserve(static_cast<std::size_t>(config.runs));
    for (int i = 0; i < config.runs; ++i)
        seeds.push_back(static_cast<long long>(config.sample_seed) + 1 + i);
    return seeds;
}

std::string config_to_json(const ExperimentConfig& config) {
    json backend = {{"kind", config.backend.kind}};
    if (config.backend.kind == "remote") {
        backend["base_url"] = config.backend.base_url;
        backend["api_key_env"] = config.backend.api_key_env;
        backend["timeout_s"] = config.backend.timeout_s;
        backend["max_retries"] = config.backend.max_retries;
        backend["max_inflight"] = config.backend.max_inflight;
        backend["requests_per_minute"] = config.backend.requests_per_minute;
        backend["initial_backoff_ms"] = config.backend.initial_backoff_ms;
    } else {
        backend["behavior"] = mock_behavior_name(config.backend.behavior);
        backend["seed"] = config.backend.mock_seed;
        backend["max_inflight"] = config.backend.max_inflight;
        backend["delay_ms"] = config.backend.mock_delay_ms;
        if (config.backend.behavior == MockBehavior::Hallucinate)
            backend["rate"] = config.backend.hallucinate_rate;
        if (config.backend.behavior == MockBehavior::Malformed)
            backend["format"] = malformed_format_name(config.backend.malformed_format);
    }

    json strategies = json::array();
    for (StrategyId s : config.strategies) strategies.push_back(strategy_name(s));

    json doc = {
        {"dataset", config.dataset},
        {"interactions", config.interactions_path},
        {"catalog", config.catalog_path},
        {"user_sample", {{"count", config.user_count}, {"seed", config.sample_seed}}},
        {"n_candidates", config.n_candidates},
        {"strategies", std::move(strategies)},
        {"model", config.model_id},
        {"backend", std::move(backend)},
        {"k_list", config.k_list},
        {"runs", config.runs},
        {"run_seeds", effective_run_seeds(config)},
        {"scoring_mode", scoring_mode_name(config.scoring_mode)},
        {"cache_dir", config.cache_dir},
        {"output_dir", config.output_dir},
        {"history_cap", config.history_cap},
        {"decoding", {{"temperature", config.temperature}, {"max_tokens", config.max_tokens}}},
        {"resample_negatives_per_run", config.resample_negatives_per_run},
    };
    return doc.dump(2) + "\n";
}

} // namespace mmrec
