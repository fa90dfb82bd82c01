#include "promptevo/selection.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "promptevo/error.hpp"
#include "promptevo/text.hpp"

namespace promptevo {

namespace {

constexpr std::array kLabelledTypes{TaskType::arithmetic_reasoning, TaskType::multi_step_reasoning,
                                    TaskType::language_understanding, TaskType::creative_generation,
                                    TaskType::real_world_problem};

const std::set<std::string> kNumberWords{
    "zero",   "one",     "two",     "three",   "four",     "five",    "six",     "seven",
    "eight",  "nine",    "ten",     "eleven",  "twelve",   "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen", "twenty", "thirty", "forty", "fifty",
    "sixty",  "seventy", "eighty",  "ninety",  "hundred",  "thousand", "million", "dozen",
    "half",   "twice"};
const std::set<std::string> kOperators{"+", "*", "/", "=", "%", "^"};
const std::set<std::string> kStepWords{"step", "steps"};
const std::set<std::string> kLanguageWords{"translate", "translation", "translated", "error",
                                           "errors",    "grammar",     "grammatical", "sentiment",
                                           "synonym",   "antonym"};
const std::set<std::string> kCreativeWords{"story", "stories", "poem", "poems", "poetry", "haiku",
                                           "lyrics", "fiction", "imagine", "creative"};

bool starts_with_digit(const std::string& token) {
    return !token.empty() && std::isdigit(static_cast<unsigned char>(token[0]));
}

bool is_terminator(const std::string& token) { return token == "." || token == "?" || token == "!"; }

bool any_of_words(const std::vector<std::string>& tokens, const std::set<std::string>& words) {
    return std::any_of(tokens.begin(), tokens.end(), [&](const auto& t) { return words.count(t) > 0; });
}

std::string format_examples(const TaskSample& sample, const std::vector<TaskSample>& extra) {
    std::string out;
    auto add = [&out](const TaskSample& s) {
        if (!out.empty()) out += "\n\n";
        out += "Question: " + s.question + "\nReference answer: " + s.reference;
    };
    add(sample);
    for (const auto& s : extra) add(s);
    return out;
}

CompletionRequest make_request(const CompletionRequest& defaults, std::string user_text) {
    CompletionRequest request = defaults;
    request.user_text = std::move(user_text);
    return request;
}

std::optional<double> parse_weight(std::string_view text) {
    const std::string s(trim(text));
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double value = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

}  // namespace

std::string_view to_string(TaskType type) {
    switch (type) {
        case TaskType::arithmetic_reasoning: return "arithmetic_reasoning";
        case TaskType::multi_step_reasoning: return "multi_step_reasoning";
        case TaskType::language_understanding: return "language_understanding";
        case TaskType::creative_generation: return "creative_generation";
        case TaskType::real_world_problem: return "real_world_problem";
        case TaskType::unknown: return "unknown";
    }
    return "unknown";
}

TaskType parse_task_type(std::string_view label) {
    for (const auto type : kLabelledTypes) {
        if (label == to_string(type)) return type;
    }
    return TaskType::unknown;
}

std::string SelectorTemplates::default_classify_template() {
    return "Classify the task type of the dataset example below.\n"
           "Answer with exactly one label from: {labels}.\n\n"
           "{examples}\n\n"
           "Label:";
}

std::string SelectorTemplates::default_select_template() {
    return "Select the evaluation metrics for scoring prompts on a {task_type} task and weight them by priority.\n"
           "Available metrics: {metrics}.\n"
           "Reply with one line per chosen metric in the form metric=weight, highest priority first.\n\n"
           "{examples}";
}

FallbackTable default_fallback_table() {
    using K = MetricKind;
    const std::vector<std::pair<K, double>> reasoning{{K::similarity, 0.7}, {K::complexity, 0.3}};
    const std::vector<std::pair<K, double>> general{
        {K::similarity, 0.4}, {K::fluency, 0.2}, {K::diversity, 0.2}, {K::complexity, 0.2}};
    return {
        {TaskType::arithmetic_reasoning, reasoning},
        {TaskType::multi_step_reasoning, reasoning},
        {TaskType::creative_generation, {{K::diversity, 0.5}, {K::fluency, 0.3}, {K::similarity, 0.2}}},
        {TaskType::language_understanding, {{K::similarity, 0.6}, {K::fluency, 0.4}}},
        {TaskType::real_world_problem, general},
        {TaskType::unknown, general},
    };
}

TaskType classify_task_rules(const TaskSample& sample) {
    const auto tokens = tokenize(sample.question);

    std::size_t numbers = 0;
    bool numeric = false;
    std::size_t sentences = 0;
    bool open_sentence = false;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& t = tokens[i];
        const bool between_digits = i > 0 && i + 1 < tokens.size() && starts_with_digit(tokens[i - 1]) &&
                                    starts_with_digit(tokens[i + 1]);
        if (starts_with_digit(t) || kNumberWords.count(t)) {
            ++numbers;
            numeric = true;
        } else if (kOperators.count(t) || (t == "-" && between_digits)) {
            numeric = true;
        } else if (t == "how" && i + 1 < tokens.size() && (tokens[i + 1] == "many" || tokens[i + 1] == "much")) {
            numeric = true;
        }
        if (is_terminator(t) && !(t == "." && between_digits)) {
            if (open_sentence) ++sentences;
            open_sentence = false;
        } else {
            open_sentence = true;
        }
    }
    if (open_sentence) ++sentences;

    const bool stepwise = any_of_words(tokens, kStepWords);
    if (numeric) {
        if (stepwise || (numbers >= 3 && sentences >= 2)) return TaskType::multi_step_reasoning;
        return TaskType::arithmetic_reasoning;
    }
    if (stepwise) return TaskType::multi_step_reasoning;
    if (any_of_words(tokens, kLanguageWords)) return TaskType::language_understanding;
    if (any_of_words(tokens, kCreativeWords)) return TaskType::creative_generation;
    return TaskType::real_world_problem;
}

std::optional<TaskType> parse_classification(std::string_view response) {
    std::string label = to_lower(trim(response));
    auto strip = [&label](std::string_view chars) {
        while (!label.empty() && chars.find(label.back()) != std::string_view::npos) label.pop_back();
        while (!label.empty() && chars.find(label.front()) != std::string_view::npos) label.erase(0, 1);
    };
    strip(" \t\r\n.\"'`*");
    const auto type = parse_task_type(label);
    if (type == TaskType::unknown) return std::nullopt;
    return type;
}

TaskProfile classify_task(const TaskSample& sample, CompletionProvider& llm, const SelectorOptions& options) {
    if (trim(sample.question).empty()) throw Error("cannot classify an empty question");
    std::string labels;
    for (const auto type : kLabelledTypes) {
        if (!labels.empty()) labels += ", ";
        labels += to_string(type);
    }
    const auto user_text = render_template(
        options.templates.classify,
        {{"labels", labels}, {"examples", format_examples(sample, options.extra_examples)}});
    try {
        const auto result = llm.complete(make_request(options.request_defaults, user_text));
        if (const auto type = parse_classification(result.text)) return {*type, sample, "llm"};
    } catch (const std::exception&) {
        // Fall through to the keyword rules.
    }
    return {classify_task_rules(sample), sample, "rules"};
}

std::optional<MetricPlan> parse_metric_plan(std::string_view response) {
    std::vector<std::pair<MetricKind, double>> raw;
    std::istringstream lines{std::string(response)};
    std::string line;
    while (std::getline(lines, line)) {
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) return std::nullopt;
        const auto kind = try_parse_metric_kind(trim(body.substr(0, eq)));
        const auto weight = parse_weight(body.substr(eq + 1));
        if (!kind || !weight) return std::nullopt;
        raw.emplace_back(*kind, *weight);
    }
    try {
        return normalize_weights(raw);
    } catch (const Error&) {
        return std::nullopt;
    }
}

MetricPlan fallback_plan(TaskType type, const FallbackTable& table) {
    auto it = table.find(type);
    if (it == table.end()) it = table.find(TaskType::unknown);
    if (it == table.end()) return normalize_weights({{MetricKind::similarity, 1.0}});
    return normalize_weights(it->second);
}

MetricPlan select_metrics(const TaskProfile& profile, CompletionProvider& llm, const SelectorOptions& options) {
    std::string metrics;
    for (const auto kind : kAllMetricKinds) {
        if (!metrics.empty()) metrics += ", ";
        metrics += to_string(kind);
    }
    const auto user_text = render_template(
        options.templates.select, {{"task_type", std::string(to_string(profile.task_type))},
                                   {"metrics", metrics},
                                   {"examples", format_examples(profile.sample, options.extra_examples)}});
    try {
        const auto result = llm.complete(make_request(options.request_defaults, user_text));
        if (auto plan = parse_metric_plan(result.text)) return *plan;
    } catch (const std::exception&) {
        // Fall through to the table.
    }
    return fallback_plan(profile.task_type, options.fallback);
}

}  // namespace promptevo
