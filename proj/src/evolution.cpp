#include "promptevo/evolution.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "promptevo/error.hpp"
#include "promptevo/text.hpp"

namespace promptevo {

using nlohmann::json;

void validate(const StrategyLibrary& library) {
    auto check = [](const std::vector<std::string>& list, const char* what) {
        if (list.empty()) throw Error(fmt::format("strategy library has no {}", what));
        std::set<std::string> seen;
        for (const auto& entry : list) {
            if (trim(entry).empty()) throw Error(fmt::format("strategy library has a blank entry in {}", what));
            if (!seen.insert(entry).second)
                throw Error(fmt::format("duplicate entry in {}: '{}'", what, entry));
        }
    };
    check(library.thinking_styles, "thinking_styles");
    check(library.mutation_strategies, "mutation_strategies");
}

StrategyLibrary default_strategy_library() {
    return {
        {
            "Think like a patient teacher explaining to a student.",
            "Reason like a careful mathematician who checks every calculation.",
            "Act as a skeptical reviewer looking for mistakes.",
            "Use plain, concise language and skip unnecessary detail.",
            "Consider the problem from several perspectives before answering.",
            "Work backwards from what the question asks for.",
            "Focus on the key quantities and how they relate.",
            "Imagine explaining the solution to a child.",
            "Organize the given information before solving.",
            "Rely on common sense and real-world intuition.",
        },
        {
            "breaking the task into steps",
            "adding a request to double-check the final answer",
            "making the instruction shorter and more direct",
            "asking for the answer in a fixed output format",
            "identifying the relevant information first",
            "removing ambiguous or unnecessary wording",
            "restating the question before solving it",
            "working through an intermediate example",
            "explaining the reasoning behind each operation",
            "verifying units and quantities",
        },
    };
}

StrategyLibrary parse_strategy_library(const std::string& text) {
    StrategyLibrary library;
    std::vector<std::string>* section = nullptr;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line == "[thinking_styles]") {
            section = &library.thinking_styles;
        } else if (line == "[mutation_strategies]") {
            section = &library.mutation_strategies;
        } else if (line.front() == '[') {
            throw ConfigError(fmt::format("strategy library line {}: unknown section {}", line_no, line));
        } else if (!section) {
            throw ConfigError(fmt::format("strategy library line {}: entry outside a section", line_no));
        } else {
            section->emplace_back(line);
        }
    }
    try {
        validate(library);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return library;
}

StrategyLibrary load_strategy_library(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read strategy library " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_strategy_library(buffer.str());
}

std::string EvolutionTemplates::default_generate_template() {
    return "Write one instruction prompt that will help a language model solve tasks like the one below.\n"
           "Thinking style: {style}\n"
           "Task: {task}\n"
           "Reply with the instruction only.";
}

std::string EvolutionTemplates::default_mutate_template() {
    return "Improve the instruction prompt below by applying this strategy: {strategy}.\n"
           "Instruction: {prompt}\n"
           "Reply with the improved instruction only.";
}

void validate(const EvolutionConfig& config) {
    if (config.population_size == 0) throw Error("population_size must be positive");
    if (config.tournament_size == 0 || config.tournament_size > config.population_size)
        throw Error(fmt::format("tournament_size must be in [1, {}]", config.population_size));
    if (config.population_size >= 2 && config.tournament_size < 2)
        throw Error("tournament_size must be at least 2 when population_size >= 2");
    if (config.target_score && !(*config.target_score >= 0.0 && *config.target_score <= 1.0))
        throw Error("target_score must be in [0, 1]");
}

std::string prompt_id(std::size_t generation, std::size_t slot) {
    return fmt::format("g{:03}-{:03}", generation, slot);
}

namespace {

std::string ask(CompletionProvider& llm, const CompletionRequest& defaults, std::string user_text) {
    CompletionRequest request = defaults;
    request.user_text = std::move(user_text);
    auto text = std::string(trim(llm.complete(request).text));
    if (text.empty()) throw ProviderError("LLM returned an empty prompt");
    return text;
}

}  // namespace

std::vector<Prompt> initialize_population(const std::string& task_description, const StrategyLibrary& library,
                                          CompletionProvider& llm, const EvolutionConfig& config, Rng& rng) {
    validate(library);
    if (config.population_size == 0) throw Error("population_size must be positive");
    std::vector<Prompt> population;
    std::set<std::string> texts;
    for (std::size_t slot = 0; slot < config.population_size; ++slot) {
        std::string text;
        try {
            for (int attempt = 0; attempt < 2; ++attempt) {
                const auto& style = library.thinking_styles[rng.uniform(library.thinking_styles.size())];
                text = ask(llm, config.request_defaults,
                           render_template(config.templates.generate, {{"style", style}, {"task", task_description}}));
                if (!texts.count(text)) break;
            }
        } catch (const std::exception& e) {
            throw Error(fmt::format("initializing slot {}: {}", slot, e.what()));
        }
        texts.insert(text);
        population.push_back({prompt_id(0, slot), std::move(text), 0, std::nullopt, std::nullopt});
    }
    return population;
}

Prompt mutate_prompt(const Prompt& parent, const StrategyLibrary& library, CompletionProvider& llm, Rng& rng,
                     const std::string& child_id, const EvolutionTemplates& templates,
                     const CompletionRequest& request_defaults) {
    validate(parent);
    validate(library);
    const auto& strategy = library.mutation_strategies[rng.uniform(library.mutation_strategies.size())];
    std::string text;
    try {
        text = ask(llm, request_defaults,
                   render_template(templates.mutate, {{"strategy", strategy}, {"prompt", parent.text}}));
    } catch (const std::exception& e) {
        throw Error(fmt::format("mutating '{}': {}", parent.id, e.what()));
    }
    return {child_id, std::move(text), parent.generation + 1, parent.id, strategy};
}

bool ranks_before(const ScoredPrompt& a, const ScoredPrompt& b) {
    if (a.fused != b.fused) return a.fused > b.fused;
    return a.prompt.id < b.prompt.id;
}

const ScoredPrompt& tournament_select(const std::vector<ScoredPrompt>& population, std::size_t k, Rng& rng) {
    if (population.empty()) throw Error("tournament over an empty population");
    if (k == 0 || k > population.size())
        throw Error(fmt::format("tournament size {} invalid for population of {}", k, population.size()));
    const auto drawn = rng.sample_without_replacement(population.size(), k);
    const ScoredPrompt* winner = &population[drawn.front()];
    for (const auto i : drawn) {
        if (ranks_before(population[i], *winner)) winner = &population[i];
    }
    return *winner;
}

namespace {

const ScoredPrompt& best_of(const std::vector<ScoredPrompt>& population) {
    return *std::min_element(population.begin(), population.end(), ranks_before);
}

}  // namespace

EvolutionResult evolve(const std::string& task_description, const StrategyLibrary& library,
                       CompletionProvider& llm, const EvolutionConfig& config, const PromptScorer& scorer) {
    validate(library);
    validate(config);
    Rng rng(config.seed);
    EvolutionResult result;

    auto fail = [](std::size_t generation, const std::exception& e) {
        return Error(fmt::format("generation {}: {}", generation, e.what()));
    };

    std::vector<ScoredPrompt> population;
    try {
        for (auto& prompt : initialize_population(task_description, library, llm, config, rng))
            population.push_back(scorer(prompt));
    } catch (const std::exception& e) {
        throw fail(0, e);
    }
    result.best = best_of(population);
    result.logs.push_back({0, population, result.best});

    auto reached_target = [&] { return config.target_score && result.best.fused >= *config.target_score; };

    for (std::size_t generation = 1; generation <= config.generations && !reached_target(); ++generation) {
        std::vector<ScoredPrompt> next;
        try {
            for (std::size_t slot = 0; slot < config.population_size; ++slot) {
                const auto& parent = tournament_select(population, config.tournament_size, rng);
                auto child = mutate_prompt(parent.prompt, library, llm, rng, prompt_id(generation, slot),
                                           config.templates, config.request_defaults);
                next.push_back(scorer(child));
            }
        } catch (const std::exception& e) {
            throw fail(generation, e);
        }
        if (config.elitism) next.push_back(result.best);
        std::sort(next.begin(), next.end(), ranks_before);
        next.resize(config.population_size);

        population = std::move(next);
        if (ranks_before(population.front(), result.best)) result.best = population.front();
        result.logs.push_back({generation, population, population.front()});
    }
    return result;
}

namespace {

json to_json(const ScoredPrompt& sp) {
    json scores = json::object();
    for (const auto& [kind, value] : sp.scores) scores[std::string(to_string(kind))] = value;
    return {{"id", sp.prompt.id},
            {"text", sp.prompt.text},
            {"generation", sp.prompt.generation},
            {"parent_id", sp.prompt.parent_id ? json(*sp.prompt.parent_id) : json(nullptr)},
            {"mutation_note", sp.prompt.mutation_note ? json(*sp.prompt.mutation_note) : json(nullptr)},
            {"scores", scores},
            {"fused", sp.fused}};
}

ScoredPrompt scored_from_json(const json& j) {
    ScoredPrompt sp;
    sp.prompt.id = j.at("id").get<std::string>();
    sp.prompt.text = j.at("text").get<std::string>();
    sp.prompt.generation = j.at("generation").get<std::size_t>();
    if (!j.at("parent_id").is_null()) sp.prompt.parent_id = j["parent_id"].get<std::string>();
    if (!j.at("mutation_note").is_null()) sp.prompt.mutation_note = j["mutation_note"].get<std::string>();
    for (const auto& [name, value] : j.at("scores").items()) sp.scores[parse_metric_kind(name)] = value.get<double>();
    sp.fused = j.at("fused").get<double>();
    return sp;
}

}  // namespace

std::string serialize_logs(const std::vector<GenerationLog>& logs) {
    std::string out;
    for (const auto& log : logs) {
        json population = json::array();
        for (const auto& sp : log.population) population.push_back(to_json(sp));
        const json line = {{"generation", log.generation}, {"best", to_json(log.best)}, {"population", population}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::vector<GenerationLog> parse_logs(const std::string& jsonl) {
    std::vector<GenerationLog> logs;
    std::istringstream in(jsonl);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            const auto j = json::parse(line);
            GenerationLog log;
            log.generation = j.at("generation").get<std::size_t>();
            log.best = scored_from_json(j.at("best"));
            for (const auto& sp : j.at("population")) log.population.push_back(scored_from_json(sp));
            logs.push_back(std::move(log));
        } catch (const std::exception& e) {
            throw Error(fmt::format("generation log line {}: {}", line_no, e.what()));
        }
    }
    return logs;
}

}  // namespace promptevo
