#include "promptevo/cli.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "promptevo/error.hpp"
#include "promptevo/text.hpp"

namespace promptevo {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot read {} {}", what, path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

/// Collects artifacts in memory and publishes them with one directory rename.
class ArtifactWriter {
public:
    explicit ArtifactWriter(fs::path target) : target_(std::move(target)) {}

    void add(std::string name, std::string content) { files_.emplace_back(std::move(name), std::move(content)); }

    void commit() {
        const fs::path parent = target_.has_parent_path() ? target_.parent_path() : fs::path(".");
        fs::create_directories(parent);
        const fs::path staging = parent / ("." + target_.filename().string() + ".partial");
        fs::remove_all(staging);
        fs::create_directory(staging);
        try {
            for (const auto& [name, content] : files_) {
                std::ofstream out(staging / name, std::ios::binary);
                out << content;
                if (!out.flush()) throw Error("cannot write " + (staging / name).string());
            }
            if (fs::exists(target_)) fs::remove_all(target_);
            fs::rename(staging, target_);
        } catch (...) {
            std::error_code ignored;
            fs::remove_all(staging, ignored);
            throw;
        }
    }

private:
    fs::path target_;
    std::vector<std::pair<std::string, std::string>> files_;
};

std::string profile_json(const TaskProfile& profile) {
    const nlohmann::ordered_json doc = {{"task_type", std::string(to_string(profile.task_type))},
                                        {"source", profile.source},
                                        {"question", profile.sample.question},
                                        {"reference", profile.sample.reference}};
    return doc.dump(2) + "\n";
}

std::vector<DatasetItem> dataset_of(const RunConfig& config) {
    return load_dataset(config.dataset.string(), config.limit);
}

}  // namespace

int guarded(std::ostream& err, const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitPipelineError;
    }
}

int cmd_optimize(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto items = dataset_of(config);
        auto llm = make_completion_provider(config.provider);
        const auto providers = make_metric_providers(config.metrics, config.provider.max_inflight);
        const auto result = run_pipeline(items, *llm, providers, config.pipeline);

        ArtifactWriter writer(config.out);
        writer.add("config.json", resolved_config_json(config));
        writer.add("profile.json", profile_json(result.profile));
        writer.add("plan.json", plan_to_json(result.plan));
        writer.add("best_prompt.txt", result.prompt.text + "\n");
        writer.add("generations.jsonl", result.evolution ? serialize_logs(result.evolution->logs) : std::string{});
        writer.add("report.json", report_to_json(result.eval.report));
        writer.add("report.txt", format_report_table(result.eval.report));
        writer.add("records.jsonl", records_to_jsonl(result.eval.records));
        writer.commit();

        out << "task: " << to_string(result.profile.task_type) << " (" << result.profile.source << ")\n";
        out << "best prompt: " << result.prompt.text << '\n';
        if (result.eval.report.similarity_percent)
            out << fmt::format("similarity: {:.2f}%\n", *result.eval.report.similarity_percent);
        out << fmt::format("fused: {:.4f}\n", result.eval.report.mean_fused);
        out << "artifacts: " << config.out.string() << '\n';
    });
}

int cmd_evaluate(const RunConfig& config, const fs::path& prompt_file, const std::optional<fs::path>& plan_file,
                 std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto prompt_text = std::string(trim(read_file(prompt_file, "prompt file")));
        if (prompt_text.empty()) throw ConfigError("prompt file is empty: " + prompt_file.string());
        const auto items = dataset_of(config);
        if (items.empty()) throw ConfigError("dataset is empty");
        auto llm = make_completion_provider(config.provider);
        const auto providers = make_metric_providers(config.metrics, config.provider.max_inflight);

        MetricPlan plan;
        std::optional<TaskProfile> profile;
        if (plan_file) {
            plan = plan_from_json(read_file(*plan_file, "plan file"));
        } else if (config.pipeline.mode == AblationMode::single_metric) {
            plan = normalize_weights({{MetricKind::similarity, 1.0}});
        } else {
            profile = classify_task({items.front().question, items.front().reference}, *llm, config.pipeline.selector);
            plan = select_metrics(*profile, *llm, config.pipeline.selector);
        }
        const Prompt prompt{"user", prompt_text, 0, std::nullopt, std::nullopt};
        const auto result = run_eval(prompt, items, plan, *llm, providers, config.pipeline.eval);

        ArtifactWriter writer(config.out);
        writer.add("config.json", resolved_config_json(config));
        if (profile) writer.add("profile.json", profile_json(*profile));
        writer.add("plan.json", plan_to_json(plan));
        writer.add("report.json", report_to_json(result.report));
        writer.add("report.txt", format_report_table(result.report));
        writer.add("records.jsonl", records_to_jsonl(result.records));
        writer.commit();
        out << format_report_table(result.report);
    });
}

int cmd_classify(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto items = dataset_of(config);
        if (items.empty()) throw ConfigError("dataset is empty");
        auto llm = make_completion_provider(config.provider);
        auto selector = config.pipeline.selector;
        for (std::size_t i = 1; i < std::min(config.pipeline.selector_examples, items.size()); ++i)
            selector.extra_examples.push_back({items[i].question, items[i].reference});
        const auto profile = classify_task({items.front().question, items.front().reference}, *llm, selector);
        const auto plan = config.pipeline.mode == AblationMode::single_metric
                              ? normalize_weights({{MetricKind::similarity, 1.0}})
                              : select_metrics(profile, *llm, selector);
        out << "task_type: " << to_string(profile.task_type) << '\n';
        out << "source: " << profile.source << '\n';
        for (const auto& [kind, weight] : plan.entries()) out << fmt::format("{}={:.6g}\n", to_string(kind), weight);
    });
}

int cmd_report(const fs::path& source, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const fs::path log_path = fs::is_directory(source) ? source / "generations.jsonl" : source;
        const auto logs = parse_logs(read_file(log_path, "generation log"));
        if (logs.empty()) {
            out << "no generations recorded\n";
        } else {
            out << format_generations_table(logs);
        }
        if (fs::is_directory(source) && fs::is_regular_file(source / "report.txt"))
            out << '\n' << read_file(source / "report.txt", "report");
    });
}

}  // namespace promptevo
