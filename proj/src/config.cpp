#include "promptevo/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "promptevo/error.hpp"
#include "promptevo/evolution.hpp"

namespace promptevo {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string interpolate_env(const std::string& text) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text.compare(i, 2, "${") == 0) {
            const auto close = text.find('}', i + 2);
            if (close == std::string::npos) throw ConfigError("unterminated ${ in config value: " + text);
            const auto name = text.substr(i + 2, close - i - 2);
            const char* value = std::getenv(name.c_str());
            if (!value) throw ConfigError("environment variable " + name + " is not set");
            out += value;
            i = close + 1;
        } else {
            out.push_back(text[i++]);
        }
    }
    return out;
}

namespace {

void interpolate_tree(json& node) {
    if (node.is_string()) {
        node = interpolate_env(node.get<std::string>());
    } else if (node.is_structured()) {
        for (auto& child : node) interpolate_tree(child);
    }
}

fs::path resolve(const fs::path& base, const std::string& value) {
    const fs::path p(value);
    return p.is_absolute() ? p : base / p;
}

void require_file(const fs::path& path, const char* what) {
    if (!fs::is_regular_file(path)) throw ConfigError(fmt::format("{} not found: {}", what, path.string()));
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
    }
}

template <typename T>
void read(const json& obj, const char* key, T& target) {
    if (obj.contains(key) && !obj[key].is_null()) target = obj[key].get<T>();
}

void read_provider(const json& j, const fs::path& base, ProviderSettings& p) {
    check_keys(j, {"kind", "mock_script", "endpoint", "model", "api_key_env", "temperature", "max_tokens",
                   "system_text", "cache_file", "max_inflight", "timeout_seconds", "retry_attempts", "backoff_ms"},
               "provider");
    read(j, "kind", p.kind);
    if (j.contains("mock_script")) p.mock_script = resolve(base, j["mock_script"].get<std::string>());
    if (j.contains("cache_file")) p.cache_file = resolve(base, j["cache_file"].get<std::string>());
    read(j, "endpoint", p.endpoint);
    read(j, "model", p.model);
    read(j, "api_key_env", p.api_key_env);
    read(j, "temperature", p.temperature);
    read(j, "max_tokens", p.max_tokens);
    if (j.contains("system_text") && !j["system_text"].is_null()) p.system_text = j["system_text"].get<std::string>();
    read(j, "max_inflight", p.max_inflight);
    read(j, "timeout_seconds", p.timeout_seconds);
    read(j, "retry_attempts", p.retry_attempts);
    read(j, "backoff_ms", p.backoff_ms);
}

void read_metrics(const json& j, MetricSettings& m) {
    check_keys(j, {"backend", "service_url", "dimension", "diversity_orders", "complexity"}, "metrics");
    read(j, "backend", m.backend);
    read(j, "service_url", m.service_url);
    read(j, "dimension", m.dimension);
    if (j.contains("diversity_orders")) {
        m.diversity_orders.clear();
        for (const auto& n : j["diversity_orders"]) m.diversity_orders.insert(n.get<int>());
    }
    if (j.contains("complexity")) {
        const auto& c = j["complexity"];
        check_keys(c, {"max_tokens", "clause_cap", "step_cap", "clause_markers", "step_markers"}, "metrics.complexity");
        read(c, "max_tokens", m.complexity.max_tokens);
        read(c, "clause_cap", m.complexity.clause_cap);
        read(c, "step_cap", m.complexity.step_cap);
        read(c, "clause_markers", m.complexity.clause_markers);
        read(c, "step_markers", m.complexity.step_markers);
    }
}

void read_evolution(const json& j, EvolutionConfig& e) {
    check_keys(j, {"population_size", "generations", "tournament_size", "target_score", "elitism"}, "evolution");
    read(j, "population_size", e.population_size);
    read(j, "generations", e.generations);
    read(j, "tournament_size", e.tournament_size);
    if (j.contains("target_score") && !j["target_score"].is_null()) e.target_score = j["target_score"].get<double>();
    read(j, "elitism", e.elitism);
}

void read_templates(const json& j, PipelineOptions& p) {
    check_keys(j, {"classify", "select", "generate", "mutate"}, "templates");
    read(j, "classify", p.selector.templates.classify);
    read(j, "select", p.selector.templates.select);
    read(j, "generate", p.evolution.templates.generate);
    read(j, "mutate", p.evolution.templates.mutate);
}

void read_fallback(const json& j, FallbackTable& table) {
    for (const auto& [label, weights] : j.items()) {
        const auto type = parse_task_type(label);
        if (type == TaskType::unknown && label != "unknown")
            throw ConfigError("unknown task type in fallback_weights: " + label);
        std::vector<std::pair<MetricKind, double>> raw;
        for (const auto& [metric, w] : weights.items()) raw.emplace_back(parse_metric_kind(metric), w.get<double>());
        normalize_weights(raw);
        table[type] = raw;
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const fs::path& base_dir, const RunOverrides& overrides) {
    RunConfig config;
    std::string mode = "none";
    try {
        auto doc = json_text.empty() ? json::object() : json::parse(json_text);
        if (!doc.is_object()) throw ConfigError("config must be a JSON object");
        check_keys(doc, {"dataset", "limit", "out", "seed", "mode", "dev_fraction", "selector_examples", "provider",
                         "metrics", "evolution", "strategy_library", "templates", "fallback_weights"},
                   "config");
        interpolate_tree(doc);
        if (doc.contains("dataset")) config.dataset = resolve(base_dir, doc["dataset"].get<std::string>());
        if (doc.contains("out")) config.out = resolve(base_dir, doc["out"].get<std::string>());
        if (doc.contains("limit") && !doc["limit"].is_null()) config.limit = doc["limit"].get<std::size_t>();
        read(doc, "seed", config.seed);
        read(doc, "mode", mode);
        read(doc, "dev_fraction", config.pipeline.dev_fraction);
        read(doc, "selector_examples", config.pipeline.selector_examples);
        if (doc.contains("provider")) read_provider(doc["provider"], base_dir, config.provider);
        if (doc.contains("metrics")) read_metrics(doc["metrics"], config.metrics);
        if (doc.contains("evolution")) read_evolution(doc["evolution"], config.pipeline.evolution);
        if (doc.contains("strategy_library"))
            config.strategy_library = resolve(base_dir, doc["strategy_library"].get<std::string>());
        if (doc.contains("templates")) read_templates(doc["templates"], config.pipeline);
        if (doc.contains("fallback_weights")) read_fallback(doc["fallback_weights"], config.pipeline.selector.fallback);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }

    if (overrides.dataset) config.dataset = *overrides.dataset;
    if (overrides.mode) mode = *overrides.mode;
    if (overrides.seed) config.seed = *overrides.seed;
    if (overrides.limit) config.limit = *overrides.limit;
    if (overrides.out) config.out = *overrides.out;

    if (config.dataset.empty()) throw ConfigError("no dataset configured (use --dataset or \"dataset\")");
    require_file(config.dataset, "dataset");
    if (config.limit && *config.limit == 0) throw ConfigError("limit must be positive");
    config.pipeline.mode = parse_ablation_mode(mode);

    auto& provider = config.provider;
    if (provider.kind == "mock") {
        if (provider.mock_script.empty()) throw ConfigError("mock provider needs provider.mock_script");
        require_file(provider.mock_script, "mock script");
    } else if (provider.kind == "http") {
        if (provider.endpoint.empty()) throw ConfigError("http provider needs provider.endpoint");
        if (const char* key = std::getenv(provider.api_key_env.c_str())) provider.api_key = key;
    } else {
        throw ConfigError("provider.kind must be 'mock' or 'http', got '" + provider.kind + "'");
    }
    if (config.metrics.backend != "offline" && config.metrics.backend != "http")
        throw ConfigError("metrics.backend must be 'offline' or 'http'");
    if (config.strategy_library) {
        require_file(*config.strategy_library, "strategy library");
        config.pipeline.library = load_strategy_library(config.strategy_library->string());
    }

    CompletionRequest defaults;
    defaults.model_name = provider.model;
    defaults.temperature = provider.temperature;
    defaults.max_tokens = provider.max_tokens;
    defaults.system_text = provider.system_text;
    defaults.user_text = "-";
    try {
        validate(defaults);
        config.pipeline.evolution.seed = config.seed;
        validate(config.pipeline.evolution);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    defaults.user_text.clear();
    config.pipeline.selector.request_defaults = defaults;
    config.pipeline.evolution.request_defaults = defaults;
    config.pipeline.eval.request_defaults = defaults;
    config.pipeline.eval.dataset_name = config.dataset.stem().string();
    return config;
}

RunConfig load_run_config(const std::optional<fs::path>& path, const RunOverrides& overrides) {
    if (!path) return parse_run_config("", fs::current_path(), overrides);
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot read config " + path->string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str(), path->parent_path().empty() ? fs::path(".") : path->parent_path(),
                            overrides);
}

std::string resolved_config_json(const RunConfig& c) {
    const auto& p = c.provider;
    const auto& e = c.pipeline.evolution;
    json fallback = json::object();
    for (const auto& [type, weights] : c.pipeline.selector.fallback) {
        json w = json::object();
        for (const auto& [kind, value] : weights) w[std::string(to_string(kind))] = value;
        fallback[std::string(to_string(type))] = w;
    }
    const json doc = {
        {"dataset", c.dataset.string()},
        {"limit", c.limit ? json(*c.limit) : json(nullptr)},
        {"out", c.out.string()},
        {"seed", c.seed},
        {"mode", std::string(to_string(c.pipeline.mode))},
        {"dev_fraction", c.pipeline.dev_fraction},
        {"selector_examples", c.pipeline.selector_examples},
        {"provider",
         {{"kind", p.kind},
          {"mock_script", p.mock_script.string()},
          {"endpoint", p.endpoint},
          {"model", p.model},
          {"api_key_env", p.api_key_env},
          {"temperature", p.temperature},
          {"max_tokens", p.max_tokens},
          {"system_text", p.system_text ? json(*p.system_text) : json(nullptr)},
          {"cache_file", p.cache_file.string()},
          {"max_inflight", p.max_inflight},
          {"timeout_seconds", p.timeout_seconds},
          {"retry_attempts", p.retry_attempts},
          {"backoff_ms", p.backoff_ms}}},
        {"metrics",
         {{"backend", c.metrics.backend},
          {"service_url", c.metrics.service_url},
          {"dimension", c.metrics.dimension},
          {"diversity_orders", c.metrics.diversity_orders},
          {"complexity",
           {{"max_tokens", c.metrics.complexity.max_tokens},
            {"clause_cap", c.metrics.complexity.clause_cap},
            {"step_cap", c.metrics.complexity.step_cap},
            {"clause_markers", c.metrics.complexity.clause_markers},
            {"step_markers", c.metrics.complexity.step_markers}}}}},
        {"evolution",
         {{"population_size", e.population_size},
          {"generations", e.generations},
          {"tournament_size", e.tournament_size},
          {"target_score", e.target_score ? json(*e.target_score) : json(nullptr)},
          {"elitism", e.elitism}}},
        {"strategy_library", c.strategy_library ? json(c.strategy_library->string()) : json(nullptr)},
        {"library",
         {{"thinking_styles", c.pipeline.library.thinking_styles},
          {"mutation_strategies", c.pipeline.library.mutation_strategies}}},
        {"templates",
         {{"classify", c.pipeline.selector.templates.classify},
          {"select", c.pipeline.selector.templates.select},
          {"generate", e.templates.generate},
          {"mutate", e.templates.mutate}}},
        {"fallback_weights", fallback},
    };
    return doc.dump(2) + "\n";
}

std::shared_ptr<CompletionProvider> make_completion_provider(const ProviderSettings& settings) {
    std::shared_ptr<CompletionProvider> provider;
    if (settings.kind == "mock") {
        provider = std::make_shared<MockProvider>(load_mock_script(settings.mock_script.string()));
    } else {
        HttpChatOptions options;
        options.endpoint = settings.endpoint;
        options.api_key = settings.api_key;
        options.timeout_seconds = settings.timeout_seconds;
        options.retry.max_attempts = settings.retry_attempts;
        options.retry.initial_backoff = std::chrono::milliseconds{settings.backoff_ms};
        options.limiter = std::make_shared<InflightLimiter>(settings.max_inflight);
        provider = std::make_shared<HttpChatProvider>(std::move(options));
    }
    if (!settings.cache_file.empty())
        provider = with_cache(provider, std::make_shared<FileStore>(settings.cache_file.string()));
    return provider;
}

MetricProviders make_metric_providers(const MetricSettings& settings, std::size_t max_inflight) {
    MetricProviders providers;
    providers.diversity_orders = settings.diversity_orders;
    providers.complexity = settings.complexity;
    if (settings.backend == "offline") {
        providers.embedder = std::make_shared<HashEmbedder>();
        providers.perplexity = std::make_shared<RepetitionPerplexity>();
    } else {
        MetricServiceOptions options;
        options.base_url = settings.service_url;
        options.dimension = settings.dimension;
        options.limiter = std::make_shared<InflightLimiter>(max_inflight);
        auto client = std::make_shared<MetricServiceClient>(std::move(options));
        providers.embedder = client;
        providers.perplexity = client;
    }
    return providers;
}

}  // namespace promptevo
