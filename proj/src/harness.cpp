#include "promptevo/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "promptevo/error.hpp"
#include "promptevo/text.hpp"

namespace promptevo {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string required_field(const json& row, const char* name, std::size_t line_no) {
    const auto it = row.find(name);
    if (it == row.end() || it->is_null())
        throw ConfigError(fmt::format("dataset line {}: missing field '{}'", line_no, name));
    std::string value;
    if (it->is_string())
        value = it->get<std::string>();
    else if (it->is_number())
        value = it->dump();
    else
        throw ConfigError(fmt::format("dataset line {}: field '{}' must be a string", line_no, name));
    if (trim(value).empty()) throw ConfigError(fmt::format("dataset line {}: field '{}' is empty", line_no, name));
    return value;
}

}  // namespace

std::vector<DatasetItem> parse_dataset(std::string_view jsonl, std::optional<std::size_t> limit) {
    if (limit && *limit == 0) throw ConfigError("dataset limit must be positive");
    std::vector<DatasetItem> items;
    std::set<std::string> ids;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (limit && items.size() >= *limit) break;
        if (trim(line).empty()) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::exception& e) {
            throw ConfigError(fmt::format("dataset line {}: invalid JSON ({})", line_no, e.what()));
        }
        if (!row.is_object()) throw ConfigError(fmt::format("dataset line {}: expected an object", line_no));
        DatasetItem item{required_field(row, "id", line_no), required_field(row, "question", line_no),
                         required_field(row, "reference", line_no)};
        if (!ids.insert(item.id).second)
            throw ConfigError(fmt::format("dataset line {}: duplicate id '{}'", line_no, item.id));
        items.push_back(std::move(item));
    }
    return items;
}

std::vector<DatasetItem> load_dataset(const std::string& path, std::optional<std::size_t> limit) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read dataset " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_dataset(buffer.str(), limit);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string compose_user_text(std::string_view prompt, std::string_view question) {
    std::string text(prompt);
    text += "\n\n";
    text += question;
    return text;
}

std::vector<OutputSample> collect_outputs(const Prompt& prompt, const std::vector<DatasetItem>& items,
                                          CompletionProvider& llm, const CompletionRequest& request_defaults) {
    std::vector<OutputSample> samples;
    samples.reserve(items.size());
    for (const auto& item : items) {
        CompletionRequest request = request_defaults;
        request.user_text = compose_user_text(prompt.text, item.question);
        auto output = llm.complete(request).text;
        if (trim(output).empty()) throw ProviderError(fmt::format("empty model output for item '{}'", item.id));
        samples.push_back({std::move(output), item.reference});
    }
    return samples;
}

EvalResult run_eval(const Prompt& prompt, const std::vector<DatasetItem>& items, const MetricPlan& plan,
                    CompletionProvider& llm, const MetricProviders& providers, const EvalOptions& options) {
    if (items.empty()) throw Error("evaluation needs at least one item");
    require_providers(plan, providers);

    EvalResult result;
    for (const auto& item : items) {
        try {
            CompletionRequest request = options.request_defaults;
            request.user_text = compose_user_text(prompt.text, item.question);
            auto output = llm.complete(request).text;
            if (trim(output).empty()) throw ProviderError("empty model output");
            auto scores = score_output({output, item.reference}, plan, providers);
            const double fused = fuse_scores(plan, scores);
            result.records.push_back({item.id, std::move(output), std::move(scores), fused});
        } catch (const std::exception& e) {
            result.failures.push_back({item.id, e.what()});
        }
    }

    const double failure_rate = static_cast<double>(result.failures.size()) / static_cast<double>(items.size());
    if (!result.failures.empty() && (result.records.empty() || failure_rate >= options.max_failure_fraction))
        throw Error(fmt::format("evaluation aborted: {} of {} items failed (first: {}: {})", result.failures.size(),
                                items.size(), result.failures.front().item_id, result.failures.front().message));

    auto& report = result.report;
    report.dataset = options.dataset_name;
    report.prompt = prompt.text;
    report.plan = plan;
    report.item_count = result.records.size();
    report.failed_count = result.failures.size();
    const auto n = static_cast<double>(result.records.size());
    for (const auto& [kind, weight] : plan.entries()) {
        double sum = 0.0;
        for (const auto& r : result.records) sum += r.scores.at(kind);
        report.mean_scores[kind] = sum / n;
    }
    double fused_sum = 0.0;
    for (const auto& r : result.records) fused_sum += r.fused;
    report.mean_fused = fused_sum / n;
    if (plan.contains(MetricKind::similarity))
        report.similarity_percent = 100.0 * report.mean_scores.at(MetricKind::similarity);
    return result;
}

std::string describe_task(const TaskProfile& profile) {
    std::string kind(to_string(profile.task_type));
    std::replace(kind.begin(), kind.end(), '_', ' ');
    return fmt::format("{}. Example question: {} Expected answer: {}", kind, profile.sample.question,
                       profile.sample.reference);
}

std::string_view to_string(AblationMode mode) {
    switch (mode) {
        case AblationMode::none: return "none";
        case AblationMode::no_prompt_optimization: return "no_prompt_optimization";
        case AblationMode::single_metric: return "single_metric";
    }
    return "none";
}

AblationMode parse_ablation_mode(std::string_view name) {
    for (const auto mode : {AblationMode::none, AblationMode::no_prompt_optimization, AblationMode::single_metric}) {
        if (name == to_string(mode)) return mode;
    }
    throw ConfigError(fmt::format("unknown ablation mode '{}' (expected none, no_prompt_optimization or single_metric)",
                                  name));
}

DatasetSplit split_dataset(const std::vector<DatasetItem>& items, double dev_fraction) {
    if (!(dev_fraction > 0.0 && dev_fraction < 1.0)) throw ConfigError("dev_fraction must be in (0, 1)");
    if (items.size() < 2) return {items, items};
    const auto dev_size = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::floor(static_cast<double>(items.size()) * dev_fraction)), 1, items.size() - 1);
    return {{items.begin(), items.begin() + static_cast<std::ptrdiff_t>(dev_size)},
            {items.begin() + static_cast<std::ptrdiff_t>(dev_size), items.end()}};
}

PipelineResult run_pipeline(const std::vector<DatasetItem>& items, CompletionProvider& llm,
                            const MetricProviders& providers, const PipelineOptions& options) {
    if (items.empty()) throw ConfigError("dataset is empty");
    const auto split = split_dataset(items, options.dev_fraction);

    PipelineResult result;
    const TaskSample sample{split.dev.front().question, split.dev.front().reference};
    auto selector = options.selector;
    for (std::size_t i = 1; i < std::min(options.selector_examples, split.dev.size()); ++i)
        selector.extra_examples.push_back({split.dev[i].question, split.dev[i].reference});
    result.profile = classify_task(sample, llm, selector);
    result.plan = options.mode == AblationMode::single_metric
                      ? normalize_weights({{MetricKind::similarity, 1.0}})
                      : select_metrics(result.profile, llm, selector);
    require_providers(result.plan, providers);

    if (options.mode == AblationMode::no_prompt_optimization) {
        result.prompt = {"generic", std::string(kGenericPrompt), 0, std::nullopt, std::nullopt};
    } else {
        const auto& plan = result.plan;
        const PromptScorer scorer = [&](const Prompt& prompt) {
            const auto samples = collect_outputs(prompt, split.dev, llm, options.evolution.request_defaults);
            return score_prompt(prompt, plan, samples, providers);
        };
        result.evolution = evolve(describe_task(result.profile), options.library, llm, options.evolution, scorer);
        result.prompt = result.evolution->best.prompt;
    }
    result.eval = run_eval(result.prompt, split.heldout, result.plan, llm, providers, options.eval);
    return result;
}

PipelineResult run_ablation(AblationMode mode, const std::vector<DatasetItem>& items, CompletionProvider& llm,
                            const MetricProviders& providers, PipelineOptions options) {
    options.mode = mode;
    return run_pipeline(items, llm, providers, options);
}

namespace {

ordered_json scores_json(const MetricScores& scores) {
    ordered_json out = ordered_json::object();
    for (const auto& [kind, value] : scores) out[std::string(to_string(kind))] = value;
    return out;
}

}  // namespace

std::string plan_to_json(const MetricPlan& plan) {
    ordered_json entries = ordered_json::array();
    for (const auto& [kind, weight] : plan.entries())
        entries.push_back({{"metric", std::string(to_string(kind))}, {"weight", weight}});
    return ordered_json{{"metrics", entries}}.dump(2) + "\n";
}

MetricPlan plan_from_json(std::string_view text) {
    try {
        const auto doc = json::parse(text);
        std::vector<std::pair<MetricKind, double>> raw;
        for (const auto& e : doc.at("metrics"))
            raw.emplace_back(parse_metric_kind(e.at("metric").get<std::string>()), e.at("weight").get<double>());
        return normalize_weights(raw);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid plan JSON: ") + e.what());
    }
}

std::string report_to_json(const EvalReport& report) {
    ordered_json plan = ordered_json::array();
    for (const auto& [kind, weight] : report.plan.entries())
        plan.push_back({{"metric", std::string(to_string(kind))}, {"weight", weight}});
    ordered_json doc = {{"dataset", report.dataset},
                        {"prompt", report.prompt},
                        {"plan", plan},
                        {"item_count", report.item_count},
                        {"failed_count", report.failed_count},
                        {"mean_scores", scores_json(report.mean_scores)},
                        {"mean_fused", report.mean_fused},
                        {"similarity_percent",
                         report.similarity_percent ? ordered_json(*report.similarity_percent) : ordered_json(nullptr)}};
    return doc.dump(2) + "\n";
}

std::string records_to_jsonl(const std::vector<EvalRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += ordered_json{{"item_id", r.item_id},
                            {"model_output", r.model_output},
                            {"scores", scores_json(r.scores)},
                            {"fused", r.fused}}
                   .dump();
        out += '\n';
    }
    return out;
}

std::string format_report_table(const EvalReport& report) {
    std::string out = fmt::format("dataset   {}\nprompt    {}\nitems     {} ({} failed)\n", report.dataset,
                                  report.prompt, report.item_count, report.failed_count);
    out += fmt::format("{:<12} {:>8} {:>8}\n", "metric", "weight", "mean");
    for (const auto& [kind, weight] : report.plan.entries())
        out += fmt::format("{:<12} {:>8.4f} {:>8.4f}\n", to_string(kind), weight, report.mean_scores.at(kind));
    out += fmt::format("{:<12} {:>8} {:>8.4f}\n", "fused", "", report.mean_fused);
    if (report.similarity_percent) out += fmt::format("similarity {:.2f}%\n", *report.similarity_percent);
    return out;
}

std::string format_generations_table(const std::vector<GenerationLog>& logs) {
    std::string out = fmt::format("{:>10} {:>10} {:>10}  {}\n", "generation", "best", "mean", "best prompt");
    for (const auto& log : logs) {
        double mean = 0.0;
        for (const auto& sp : log.population) mean += sp.fused;
        if (!log.population.empty()) mean /= static_cast<double>(log.population.size());
        auto text = log.best.prompt.text;
        std::replace(text.begin(), text.end(), '\n', ' ');
        if (text.size() > 60) text = text.substr(0, 57) + "...";
        out += fmt::format("{:>10} {:>10.4f} {:>10.4f}  {} {}\n", log.generation, log.best.fused, mean,
                           log.best.prompt.id, text);
    }
    return out;
}

}  // namespace promptevo
