#include <doctest.h>

#include "promptevo/selection.hpp"
#include "support.hpp"

using namespace promptevo;
using K = MetricKind;

namespace {

MockProvider scripted(std::string classify, std::string select) {
    return MockProvider(MockScript{{{"Classify the task type", std::move(classify)},
                                    {"Select the evaluation metrics", std::move(select)}},
                                   ""});
}

const TaskSample kJoan{"Joan has 8 kittens. She gave 2 kittens away. How many kittens does she have now?",
                       "She has 6 kittens."};

}  // namespace

TEST_CASE("task type labels") {
    CHECK(parse_task_type("creative_generation") == TaskType::creative_generation);
    CHECK(parse_task_type("banana") == TaskType::unknown);
    CHECK(parse_task_type("Arithmetic_Reasoning") == TaskType::unknown);
    CHECK(parse_classification("  Arithmetic_Reasoning.\n") == TaskType::arithmetic_reasoning);
    CHECK(parse_classification("\"language_understanding\"") == TaskType::language_understanding);
    CHECK_FALSE(parse_classification("unknown"));
    CHECK_FALSE(parse_classification("arithmetic reasoning, probably"));
}

TEST_CASE("keyword rules") {
    CHECK(classify_task_rules({"What is 8 - 2?", "6"}) == TaskType::arithmetic_reasoning);
    CHECK(classify_task_rules({"Write a poem about rain", ""}) == TaskType::creative_generation);
    CHECK(classify_task_rules({"Tell me about your day", ""}) == TaskType::real_world_problem);
    CHECK(classify_task_rules(kJoan) == TaskType::arithmetic_reasoning);
    CHECK(classify_task_rules({"A shop sells 3 pens for 2 dollars. Each notebook costs 4 dollars. What do 6 pens and "
                               "a notebook cost?",
                               ""}) == TaskType::multi_step_reasoning);
    CHECK(classify_task_rules({"Explain step by step how to bake bread", ""}) == TaskType::multi_step_reasoning);
    CHECK(classify_task_rules({"Translate this sentence into German", ""}) == TaskType::language_understanding);
    CHECK(classify_task_rules({"Find the error in the translated source", ""}) == TaskType::language_understanding);
    // Decimal points do not split sentences.
    CHECK(classify_task_rules({"Pay 3.5 and 2.5 and 1.5", ""}) == TaskType::arithmetic_reasoning);
    // Pure function.
    CHECK(classify_task_rules(kJoan) == classify_task_rules(kJoan));
}

TEST_CASE("classify_task") {
    SUBCASE("LLM answer is used when it parses") {
        auto llm = scripted("arithmetic_reasoning", "");
        const auto profile = classify_task(kJoan, llm);
        CHECK(profile.task_type == TaskType::arithmetic_reasoning);
        CHECK(profile.source == "llm");
        CHECK(profile.sample.question == kJoan.question);
    }
    SUBCASE("unparseable answer falls back to the rules") {
        auto llm = scripted("banana", "");
        const auto profile = classify_task(kJoan, llm);
        CHECK(profile.task_type == TaskType::arithmetic_reasoning);
        CHECK(profile.source == "rules");
    }
    SUBCASE("provider outage falls back to the rules") {
        auto llm = testing::failing_provider();
        const auto profile = classify_task({"Write a poem about rain", ""}, *llm);
        CHECK(profile.task_type == TaskType::creative_generation);
        CHECK(profile.source == "rules");
    }
    SUBCASE("the template carries the example") {
        std::string seen;
        testing::FunctionProvider spy([&](const CompletionRequest& r) {
            seen = r.user_text;
            return std::string("creative_generation");
        });
        SelectorOptions options;
        options.extra_examples.push_back({"Second question", "Second answer"});
        classify_task(kJoan, spy, options);
        CHECK(seen.find(kJoan.question) != std::string::npos);
        CHECK(seen.find("Second question") != std::string::npos);
        CHECK(seen.find("multi_step_reasoning") != std::string::npos);
    }
    auto llm = scripted("x", "");
    CHECK_THROWS(classify_task({"  ", ""}, llm));
}

TEST_CASE("parse_metric_plan") {
    const auto plan = parse_metric_plan("similarity=0.7\ncomplexity=0.3");
    REQUIRE(plan);
    CHECK(plan->weight(K::similarity) == doctest::Approx(0.7));
    CHECK(plan->weight(K::complexity) == doctest::Approx(0.3));
    CHECK(parse_metric_plan(" similarity = 2 \n\n diversity=2\n")->weight(K::diversity) == doctest::Approx(0.5));
    CHECK_FALSE(parse_metric_plan("similarity: 0.7"));
    CHECK_FALSE(parse_metric_plan("similarity=0.7\nlogic=0.3"));
    CHECK_FALSE(parse_metric_plan("similarity=abc"));
    CHECK_FALSE(parse_metric_plan("similarity=0.5\nsimilarity=0.5"));
    CHECK_FALSE(parse_metric_plan("similarity=0"));
    CHECK_FALSE(parse_metric_plan("similarity=inf"));
    CHECK_FALSE(parse_metric_plan(""));
}

TEST_CASE("select_metrics") {
    const TaskProfile arithmetic{TaskType::arithmetic_reasoning, kJoan, "llm"};
    SUBCASE("scripted plan") {
        auto llm = scripted("", "similarity=0.7\ncomplexity=0.3");
        const auto plan = select_metrics(arithmetic, llm);
        CHECK(plan.size() == 2);
        CHECK(plan.weight(K::similarity) == doctest::Approx(0.7));
    }
    SUBCASE("garbage falls back to the table") {
        auto llm = scripted("", "I think similarity matters most");
        const auto plan = select_metrics(arithmetic, llm);
        CHECK(plan == fallback_plan(TaskType::arithmetic_reasoning, default_fallback_table()));
        CHECK(plan.weight(K::similarity) == doctest::Approx(0.7));
        CHECK(plan.weight(K::complexity) == doctest::Approx(0.3));
    }
    SUBCASE("raw weights are normalized") {
        auto llm = scripted("", "similarity=2\ndiversity=2");
        const auto plan = select_metrics(arithmetic, llm);
        CHECK(plan.weight(K::similarity) == doctest::Approx(0.5));
        CHECK(plan.weight(K::diversity) == doctest::Approx(0.5));
    }
    SUBCASE("outage falls back") {
        auto llm = testing::failing_provider();
        const TaskProfile creative{TaskType::creative_generation, {"Write a poem", "Rain falls"}, "rules"};
        CHECK(select_metrics(creative, *llm).weight(K::diversity) == doctest::Approx(0.5));
    }
}

TEST_CASE("fallback table priorities") {
    const auto table = default_fallback_table();
    const auto arithmetic = fallback_plan(TaskType::arithmetic_reasoning, table);
    const auto creative = fallback_plan(TaskType::creative_generation, table);
    double top = 0.0;
    K top_kind = K::fluency;
    for (const auto& [kind, w] : arithmetic.entries()) {
        if (w > top) top = w, top_kind = kind;
    }
    CHECK(top_kind == K::similarity);
    CHECK(creative.weight(K::diversity) > arithmetic.weight(K::diversity));
    CHECK(fallback_plan(TaskType::unknown, table) == fallback_plan(TaskType::real_world_problem, table));
    CHECK(fallback_plan(TaskType::language_understanding, table).weight(K::fluency) == doctest::Approx(0.4));
    // Missing rows use the unknown row.
    FallbackTable partial{{TaskType::unknown, {{K::fluency, 1.0}}}};
    CHECK(fallback_plan(TaskType::creative_generation, partial).weight(K::fluency) == 1.0);
}
