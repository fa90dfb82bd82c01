#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include "promptevo/harness.hpp"
#include "promptevo/llm.hpp"
#include "promptevo/metrics.hpp"

namespace promptevo {

struct ProviderSettings {
    std::string kind = "mock";  // "mock" | "http"
    std::filesystem::path mock_script;
    std::string endpoint;
    std::string model = "gpt-3.5-turbo-0125";
    /// Environment variable holding the credential; the value itself is never written out.
    std::string api_key_env = "OPENAI_API_KEY";
    std::string api_key;
    double temperature = 0.1;
    int max_tokens = 512;
    std::optional<std::string> system_text;
    std::filesystem::path cache_file;
    std::size_t max_inflight = 4;
    double timeout_seconds = 60.0;
    int retry_attempts = 3;
    int backoff_ms = 500;
};

struct MetricSettings {
    std::string backend = "offline";  // "offline" | "http"
    std::string service_url = "http://127.0.0.1:8088";
    std::size_t dimension = 0;
    std::set<int> diversity_orders{1, 2};
    ComplexityConfig complexity;
};

struct RunOverrides {
    std::optional<std::filesystem::path> dataset;
    std::optional<std::string> mode;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> limit;
    std::optional<std::filesystem::path> out;
};

struct RunConfig {
    std::filesystem::path dataset;
    std::optional<std::size_t> limit;
    std::filesystem::path out = "runs/latest";
    std::uint64_t seed = 42;
    ProviderSettings provider;
    MetricSettings metrics;
    std::optional<std::filesystem::path> strategy_library;
    PipelineOptions pipeline;
};

/// Expands ${NAME} from the environment. Throws ConfigError for unset variables.
std::string interpolate_env(const std::string& text);

/// Parses a JSON run config; relative paths resolve against `base_dir`. Flags in
/// `overrides` win over file values. Referenced files must exist.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir,
                           const RunOverrides& overrides = {});
RunConfig load_run_config(const std::optional<std::filesystem::path>& path, const RunOverrides& overrides = {});

/// Resolved configuration as JSON (credentials excluded).
std::string resolved_config_json(const RunConfig& config);

std::shared_ptr<CompletionProvider> make_completion_provider(const ProviderSettings& settings);
MetricProviders make_metric_providers(const MetricSettings& settings, std::size_t max_inflight);

}  // namespace promptevo
