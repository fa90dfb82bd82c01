#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "promptevo/cli.hpp"
#include "promptevo/config.hpp"
#include "promptevo/error.hpp"

using namespace promptevo;
namespace fs = std::filesystem;

namespace {

const fs::path kToyDir = fs::path(PROMPTEVO_SOURCE_DIR) / "data" / "toy";

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("promptevo-test-" + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ignored;
        fs::remove_all(path_, ignored);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write(const fs::path& path, const std::string& content) { std::ofstream(path, std::ios::binary) << content; }

RunConfig toy_config(const fs::path& out, std::optional<std::string> mode = {}) {
    RunOverrides overrides;
    overrides.out = out;
    overrides.mode = std::move(mode);
    return load_run_config(kToyDir / "config.json", overrides);
}

}  // namespace

TEST_CASE("interpolate_env") {
    ::setenv("PROMPTEVO_TEST_VAR", "value", 1);
    CHECK(interpolate_env("a-${PROMPTEVO_TEST_VAR}-b") == "a-value-b");
    CHECK(interpolate_env("no vars") == "no vars");
    ::unsetenv("PROMPTEVO_TEST_UNSET");
    CHECK_THROWS_WITH_AS(interpolate_env("${PROMPTEVO_TEST_UNSET}"), doctest::Contains("PROMPTEVO_TEST_UNSET"),
                         ConfigError);
    CHECK_THROWS_AS(interpolate_env("${OPEN"), ConfigError);
}

TEST_CASE("run config parsing") {
    const auto config = toy_config("/tmp/unused");
    CHECK(config.dataset == kToyDir / "arithmetic.jsonl");
    CHECK(config.pipeline.evolution.population_size == 8);
    CHECK(config.pipeline.evolution.seed == 42);
    CHECK(config.pipeline.eval.request_defaults.model_name == "mock-model");
    CHECK(config.pipeline.eval.dataset_name == "arithmetic");

    RunOverrides overrides;
    overrides.seed = 9;
    overrides.mode = "single_metric";
    overrides.limit = 5;
    const auto overridden = load_run_config(kToyDir / "config.json", overrides);
    CHECK(overridden.pipeline.evolution.seed == 9);
    CHECK(overridden.pipeline.mode == AblationMode::single_metric);
    CHECK(*overridden.limit == 5);

    CHECK_THROWS_WITH_AS(parse_run_config(R"({"dataset":"arithmetic.jsonl","populaton":3})", kToyDir),
                         doctest::Contains("populaton"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"dataset":"missing.jsonl"})", kToyDir),
                         doctest::Contains("missing.jsonl"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"dataset":"arithmetic.jsonl","provider":{"kind":"telepathy"}})", kToyDir),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"dataset":"arithmetic.jsonl","provider":{"kind":"mock","mock_script":)"
                                     R"("mock_llm.json"},"evolution":{"population_size":0}})",
                                     kToyDir),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config("[1,2]", kToyDir), ConfigError);
}

TEST_CASE("resolved config never contains the credential") {
    ::setenv("PROMPTEVO_TEST_KEY", "sk-secret-value", 1);
    const auto config = parse_run_config(R"({"dataset":"arithmetic.jsonl","provider":{"kind":"http",)"
                                         R"("endpoint":"http://127.0.0.1:1/v1/chat/completions",)"
                                         R"("api_key_env":"PROMPTEVO_TEST_KEY"}})",
                                         kToyDir);
    CHECK(config.provider.api_key == "sk-secret-value");
    const auto text = resolved_config_json(config);
    CHECK(text.find("sk-secret-value") == std::string::npos);
    CHECK(text.find("PROMPTEVO_TEST_KEY") != std::string::npos);
}

TEST_CASE("optimize writes identical artifacts for identical runs") {
    TempDir tmp;
    const auto out = tmp.path() / "run";
    std::ostringstream o1, e1, o2, e2;
    REQUIRE(cmd_optimize(toy_config(out), o1, e1) == kExitOk);
    std::map<std::string, std::string> first;
    for (const auto& entry : fs::directory_iterator(out)) first[entry.path().filename()] = slurp(entry.path());
    REQUIRE(cmd_optimize(toy_config(out), o2, e2) == kExitOk);
    std::map<std::string, std::string> second;
    for (const auto& entry : fs::directory_iterator(out)) second[entry.path().filename()] = slurp(entry.path());

    CHECK(first.size() == 8);
    CHECK(first == second);
    CHECK(o1.str() == o2.str());
    CHECK(first.count("best_prompt.txt"));
    const auto report = nlohmann::json::parse(first["report.json"]);
    CHECK(report["item_count"] == 16);
    CHECK(report["dataset"] == "arithmetic");
    for (const auto& entry : fs::directory_iterator(tmp.path()))
        CHECK(entry.path().filename().string().find(".partial") == std::string::npos);
}

TEST_CASE("single_metric optimize writes a one-entry similarity plan") {
    TempDir tmp;
    std::ostringstream out, err;
    REQUIRE(cmd_optimize(toy_config(tmp.path() / "run", "single_metric"), out, err) == kExitOk);
    const auto plan = nlohmann::json::parse(slurp(tmp.path() / "run" / "plan.json"));
    REQUIRE(plan["metrics"].size() == 1);
    CHECK(plan["metrics"][0]["metric"] == "similarity");
    CHECK(plan["metrics"][0]["weight"].get<double>() == 1.0);
}

TEST_CASE("no_prompt_optimization evaluates the generic prompt") {
    TempDir tmp;
    std::ostringstream out, err;
    REQUIRE(cmd_optimize(toy_config(tmp.path() / "run", "no_prompt_optimization"), out, err) == kExitOk);
    CHECK(slurp(tmp.path() / "run" / "best_prompt.txt") == "Let's think step by step.\n");
    CHECK(slurp(tmp.path() / "run" / "generations.jsonl").empty());
}

TEST_CASE("a failing run leaves no artifacts behind") {
    TempDir tmp;
    write(tmp.path() / "data.jsonl", R"({"id":"1","question":"What is 1 + 1?","reference":"2"})" "\n"
                                     R"({"id":"2","question":"What is 2 + 2?","reference":"4"})" "\n");
    write(tmp.path() / "mock.json", R"({"rules":[],"default":""})");
    write(tmp.path() / "config.json", R"({"dataset":"data.jsonl","out":"run",)"
                                      R"("provider":{"kind":"mock","mock_script":"mock.json"}})");
    std::ostringstream out, err;
    const auto config = load_run_config(tmp.path() / "config.json");
    CHECK(cmd_optimize(config, out, err) == kExitPipelineError);
    CHECK_FALSE(err.str().empty());
    CHECK(std::distance(fs::directory_iterator(tmp.path()), fs::directory_iterator()) == 3);
}

TEST_CASE("config errors map to exit code 2") {
    std::ostringstream err;
    CHECK(guarded(err, [] { throw ConfigError("dataset not found: /x/y.jsonl"); }) == kExitConfigError);
    CHECK(err.str().find("/x/y.jsonl") != std::string::npos);
    CHECK(guarded(err, [] { throw ProviderError("down"); }) == kExitPipelineError);
    CHECK(guarded(err, [] {}) == kExitOk);
}

TEST_CASE("classify prints the task type and plan") {
    std::ostringstream out, err;
    REQUIRE(cmd_classify(toy_config("/tmp/unused"), out, err) == kExitOk);
    CHECK(out.str() == "task_type: arithmetic_reasoning\nsource: llm\nsimilarity=0.7\ncomplexity=0.3\n");
}

TEST_CASE("evaluate and report") {
    TempDir tmp;
    write(tmp.path() / "prompt.txt", "Explain each operation you perform, then state the answer.\n");
    write(tmp.path() / "plan.json", R"({"metrics":[{"metric":"similarity","weight":1}]})");
    std::ostringstream out, err;
    REQUIRE(cmd_evaluate(toy_config(tmp.path() / "eval"), tmp.path() / "prompt.txt", tmp.path() / "plan.json", out,
                         err) == kExitOk);
    CHECK(out.str().find("similarity 100.00%") != std::string::npos);
    CHECK(out.str().find("items     20 (0 failed)") != std::string::npos);
    CHECK(cmd_evaluate(toy_config(tmp.path() / "eval"), tmp.path() / "missing.txt", std::nullopt, out, err) ==
          kExitConfigError);

    std::ostringstream opt_out, report_out;
    REQUIRE(cmd_optimize(toy_config(tmp.path() / "run"), opt_out, err) == kExitOk);
    REQUIRE(cmd_report(tmp.path() / "run", report_out, err) == kExitOk);
    CHECK(report_out.str().find("generation") == 0);
    CHECK(report_out.str().find("similarity") != std::string::npos);
    CHECK(cmd_report(tmp.path() / "nothing", report_out, err) == kExitConfigError);
}
