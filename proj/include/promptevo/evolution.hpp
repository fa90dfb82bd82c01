#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "promptevo/llm.hpp"
#include "promptevo/metrics.hpp"
#include "promptevo/prompt.hpp"
#include "promptevo/rng.hpp"

namespace promptevo {

struct StrategyLibrary {
    std::vector<std::string> thinking_styles;
    std::vector<std::string> mutation_strategies;
};

/// Throws Error if a list is empty or holds duplicates.
void validate(const StrategyLibrary& library);

StrategyLibrary default_strategy_library();

/// Sectioned text: entries one per line under [thinking_styles] and [mutation_strategies].
/// Blank lines and lines starting with '#' are ignored.
StrategyLibrary parse_strategy_library(const std::string& text);
StrategyLibrary load_strategy_library(const std::string& path);

struct EvolutionTemplates {
    /// Placeholders: {style}, {task}.
    std::string generate = default_generate_template();
    /// Placeholders: {strategy}, {prompt}.
    std::string mutate = default_mutate_template();

    static std::string default_generate_template();
    static std::string default_mutate_template();
};

struct EvolutionConfig {
    std::size_t population_size = 8;
    std::size_t generations = 10;
    std::size_t tournament_size = 3;
    std::optional<double> target_score;
    std::uint64_t seed = 42;
    bool elitism = true;
    EvolutionTemplates templates;
    CompletionRequest request_defaults;
};

void validate(const EvolutionConfig& config);

/// Prompt identifier for slot `slot` of generation `generation`; sorts by generation then slot.
std::string prompt_id(std::size_t generation, std::size_t slot);

std::vector<Prompt> initialize_population(const std::string& task_description,
                                          const StrategyLibrary& library, CompletionProvider& llm,
                                          const EvolutionConfig& config, Rng& rng);

Prompt mutate_prompt(const Prompt& parent, const StrategyLibrary& library,
                     CompletionProvider& llm, Rng& rng, const std::string& child_id,
                     const EvolutionTemplates& templates = {},
                     const CompletionRequest& request_defaults = {});

/// True when a should rank before b: higher fused score, then smaller id.
bool ranks_before(const ScoredPrompt& a, const ScoredPrompt& b);

const ScoredPrompt& tournament_select(const std::vector<ScoredPrompt>& population, std::size_t k,
                                      Rng& rng);

struct GenerationLog {
    std::size_t generation = 0;
    std::vector<ScoredPrompt> population;
    ScoredPrompt best;
};

struct EvolutionResult {
    ScoredPrompt best;
    std::vector<GenerationLog> logs;
};

/// Fitness of a single prompt; evolve() is agnostic to how outputs are produced.
using PromptScorer = std::function<ScoredPrompt(const Prompt&)>;

EvolutionResult evolve(const std::string& task_description, const StrategyLibrary& library,
                       CompletionProvider& llm, const EvolutionConfig& config,
                       const PromptScorer& scorer);

/// One JSON object per line, one line per generation.
std::string serialize_logs(const std::vector<GenerationLog>& logs);
std::vector<GenerationLog> parse_logs(const std::string& jsonl);

}  // namespace promptevo
