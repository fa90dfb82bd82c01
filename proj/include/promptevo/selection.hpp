#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promptevo/llm.hpp"
#include "promptevo/metrics.hpp"

namespace promptevo {

enum class TaskType {
    arithmetic_reasoning,
    multi_step_reasoning,
    language_understanding,
    creative_generation,
    real_world_problem,
    unknown,
};

std::string_view to_string(TaskType type);
/// Any unrecognized label maps to TaskType::unknown.
TaskType parse_task_type(std::string_view label);

struct TaskSample {
    std::string question;
    std::string reference;
};

struct TaskProfile {
    TaskType task_type = TaskType::unknown;
    TaskSample sample;
    std::string source;  // "llm" or "rules"
};

struct SelectorTemplates {
    /// Placeholders: {examples}, {labels}.
    std::string classify = default_classify_template();
    /// Placeholders: {task_type}, {examples}, {metrics}.
    std::string select = default_select_template();

    static std::string default_classify_template();
    static std::string default_select_template();
};

using FallbackTable = std::map<TaskType, std::vector<std::pair<MetricKind, double>>>;

/// Built-in per-task weights used when the LLM answer cannot be used.
FallbackTable default_fallback_table();

struct SelectorOptions {
    SelectorTemplates templates;
    FallbackTable fallback = default_fallback_table();
    /// Extra dataset examples shown to the LLM besides the profile sample.
    std::vector<TaskSample> extra_examples;
    CompletionRequest request_defaults;
};

/// Deterministic keyword classifier.
TaskType classify_task_rules(const TaskSample& sample);

/// Label from a free-form LLM answer, or nullopt when it is not exactly one known label.
std::optional<TaskType> parse_classification(std::string_view response);

/// Asks the LLM for the task type; falls back to the keyword rules on any failure.
TaskProfile classify_task(const TaskSample& sample, CompletionProvider& llm,
                          const SelectorOptions& options = {});

/// Parses "kind=weight" lines. Returns nullopt if any non-blank line is malformed.
std::optional<MetricPlan> parse_metric_plan(std::string_view response);

MetricPlan fallback_plan(TaskType type, const FallbackTable& table);

/// Asks the LLM for weighted metrics; falls back to the per-task table on any failure.
MetricPlan select_metrics(const TaskProfile& profile, CompletionProvider& llm,
                          const SelectorOptions& options = {});

}  // namespace promptevo
