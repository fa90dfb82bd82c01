#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promptevo/evolution.hpp"
#include "promptevo/llm.hpp"
#include "promptevo/metrics.hpp"
#include "promptevo/selection.hpp"

namespace promptevo {

struct DatasetItem {
    std::string id;
    std::string question;
    std::string reference;
};

/// JSON-lines records with string fields id, question, reference. Blank lines are skipped.
/// Errors carry the 1-based line number.
std::vector<DatasetItem> parse_dataset(std::string_view jsonl, std::optional<std::size_t> limit = {});
std::vector<DatasetItem> load_dataset(const std::string& path, std::optional<std::size_t> limit = {});

/// Prompt text, one blank line, then the question.
std::string compose_user_text(std::string_view prompt, std::string_view question);

struct EvalRecord {
    std::string item_id;
    std::string model_output;
    MetricScores scores;
    double fused = 0.0;
};

struct ItemFailure {
    std::string item_id;
    std::string message;
};

struct EvalReport {
    std::string dataset;
    std::string prompt;
    MetricPlan plan;
    std::size_t item_count = 0;
    std::size_t failed_count = 0;
    MetricScores mean_scores;
    double mean_fused = 0.0;
    /// 100 x mean similarity, when similarity is part of the plan.
    std::optional<double> similarity_percent;
};

struct EvalResult {
    EvalReport report;
    std::vector<EvalRecord> records;
    std::vector<ItemFailure> failures;
};

struct EvalOptions {
    std::string dataset_name;
    CompletionRequest request_defaults;
    /// Fraction of failed items at or above which the run aborts.
    double max_failure_fraction = 0.10;
};

/// Runs the prompt over every item, scores each output against its reference and averages.
EvalResult run_eval(const Prompt& prompt, const std::vector<DatasetItem>& items, const MetricPlan& plan,
                    CompletionProvider& llm, const MetricProviders& providers,
                    const EvalOptions& options = {});

/// Model outputs of `prompt` for each item, paired with references.
std::vector<OutputSample> collect_outputs(const Prompt& prompt, const std::vector<DatasetItem>& items,
                                          CompletionProvider& llm,
                                          const CompletionRequest& request_defaults);

/// Builds the "task + example" description fed to prompt generation.
std::string describe_task(const TaskProfile& profile);

enum class AblationMode { none, no_prompt_optimization, single_metric };

std::string_view to_string(AblationMode mode);
/// Throws ConfigError for unknown modes.
AblationMode parse_ablation_mode(std::string_view name);

inline constexpr std::string_view kGenericPrompt = "Let's think step by step.";

struct PipelineOptions {
    AblationMode mode = AblationMode::none;
    /// Leading fraction of items used for fitness; the rest is held out for the report.
    double dev_fraction = 0.2;
    /// Dev items shown to the classifier and metric selector.
    std::size_t selector_examples = 1;
    SelectorOptions selector;
    StrategyLibrary library = default_strategy_library();
    EvolutionConfig evolution;
    EvalOptions eval;
};

struct DatasetSplit {
    std::vector<DatasetItem> dev;
    std::vector<DatasetItem> heldout;
};

/// First max(1, floor(n * dev_fraction)) items form dev; the rest are held out.
/// With fewer than two items both sides hold the whole dataset.
DatasetSplit split_dataset(const std::vector<DatasetItem>& items, double dev_fraction);

struct PipelineResult {
    TaskProfile profile;
    MetricPlan plan;
    Prompt prompt;
    std::optional<EvolutionResult> evolution;
    EvalResult eval;
};

/// classify -> select metrics -> evolve on dev -> evaluate on held-out, honoring the ablation mode.
PipelineResult run_pipeline(const std::vector<DatasetItem>& items, CompletionProvider& llm,
                            const MetricProviders& providers, const PipelineOptions& options);

/// run_pipeline with options.mode overridden.
PipelineResult run_ablation(AblationMode mode, const std::vector<DatasetItem>& items,
                            CompletionProvider& llm, const MetricProviders& providers,
                            PipelineOptions options);

std::string plan_to_json(const MetricPlan& plan);
MetricPlan plan_from_json(std::string_view json);
std::string report_to_json(const EvalReport& report);
std::string records_to_jsonl(const std::vector<EvalRecord>& records);
std::string format_report_table(const EvalReport& report);
std::string format_generations_table(const std::vector<GenerationLog>& logs);

}  // namespace promptevo
