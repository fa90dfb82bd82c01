#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "promptevo/cli.hpp"

namespace {

struct CommonFlags {
    std::optional<std::string> config;
    std::optional<std::string> dataset;
    std::optional<std::string> mode;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> limit;
    std::optional<std::string> out;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config, "Run config (JSON)");
        cmd->add_option("--dataset", dataset, "Dataset (JSON lines with id/question/reference)");
        cmd->add_option("--mode", mode, "Ablation mode: none | no_prompt_optimization | single_metric");
        cmd->add_option("--seed", seed, "Random seed");
        cmd->add_option("--limit", limit, "Use only the first N dataset items");
        cmd->add_option("--out", out, "Output directory");
    }

    promptevo::RunConfig load() const {
        promptevo::RunOverrides o;
        if (dataset) o.dataset = *dataset;
        o.mode = mode;
        o.seed = seed;
        o.limit = limit;
        if (out) o.out = *out;
        std::optional<std::filesystem::path> path;
        if (config) path = *config;
        return promptevo::load_run_config(path, o);
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Task-aware evolutionary prompt optimizer"};
    app.require_subcommand(1);

    CommonFlags optimize_flags, evaluate_flags, classify_flags;
    auto* optimize = app.add_subcommand("optimize", "Classify, select metrics, evolve a prompt and evaluate it");
    optimize_flags.attach(optimize);

    auto* evaluate = app.add_subcommand("evaluate", "Score a given prompt on a dataset");
    evaluate_flags.attach(evaluate);
    std::string prompt_file;
    std::optional<std::string> plan_file;
    evaluate->add_option("--prompt", prompt_file, "File holding the prompt text")->required();
    evaluate->add_option("--plan", plan_file, "plan.json to reuse instead of selecting metrics");

    auto* classify = app.add_subcommand("classify", "Print the task profile and metric plan");
    classify_flags.attach(classify);

    auto* report = app.add_subcommand("report", "Render stored generation logs");
    std::string report_source;
    report->add_option("source", report_source, "Output directory or generations.jsonl")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : promptevo::kExitConfigError;
    }

    auto with_config = [](const CommonFlags& flags, auto&& run) {
        std::optional<promptevo::RunConfig> config;
        const int rc = promptevo::guarded(std::cerr, [&] { config = flags.load(); });
        return rc != 0 ? rc : run(*config);
    };

    if (*optimize) {
        return with_config(optimize_flags,
                           [](const auto& c) { return promptevo::cmd_optimize(c, std::cout, std::cerr); });
    }
    if (*evaluate) {
        return with_config(evaluate_flags, [&](const auto& c) {
            std::optional<std::filesystem::path> plan;
            if (plan_file) plan = *plan_file;
            return promptevo::cmd_evaluate(c, prompt_file, plan, std::cout, std::cerr);
        });
    }
    if (*classify) {
        return with_config(classify_flags,
                           [](const auto& c) { return promptevo::cmd_classify(c, std::cout, std::cerr); });
    }
    return promptevo::cmd_report(report_source, std::cout, std::cerr);
}
