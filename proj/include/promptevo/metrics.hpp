#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "promptevo/backends.hpp"
#include "promptevo/prompt.hpp"

namespace promptevo {

enum class MetricKind { similarity, diversity, fluency, complexity };

inline constexpr MetricKind kAllMetricKinds[] = {MetricKind::similarity, MetricKind::diversity,
                                                 MetricKind::fluency, MetricKind::complexity};

std::string_view to_string(MetricKind kind);
/// Exact, case-insensitive match on the four names. Throws Error otherwise.
MetricKind parse_metric_kind(std::string_view name);
std::optional<MetricKind> try_parse_metric_kind(std::string_view name);

struct PlanEntry {
    MetricKind kind;
    double weight;

    bool operator==(const PlanEntry&) const = default;
};

/// Selected metrics with normalized weights. Only constructible through normalize_weights.
class MetricPlan {
public:
    const std::vector<PlanEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool contains(MetricKind kind) const;
    double weight(MetricKind kind) const;

    bool operator==(const MetricPlan&) const = default;

private:
    friend MetricPlan normalize_weights(const std::vector<std::pair<MetricKind, double>>& raw);
    std::vector<PlanEntry> entries_;
};

/// Scales weights to sum to one, preserving order. Throws Error on an empty list,
/// duplicate kinds, more than four entries, or a weight that is not finite and positive.
MetricPlan normalize_weights(const std::vector<std::pair<MetricKind, double>>& raw);

using MetricScores = std::map<MetricKind, double>;

struct ScoredPrompt {
    Prompt prompt;
    MetricScores scores;
    double fused = 0.0;
};

/// Weighted sum of the plan's metrics.
double fuse_scores(const MetricPlan& plan, const MetricScores& scores);

/// max(0, cosine) between the embeddings of two non-blank texts.
double similarity_score(std::string_view candidate, std::string_view reference,
                        EmbeddingProvider& embedder);

/// Mean over `orders` of |unique n-grams| / |n-grams|.
double diversity_score(std::string_view text, const std::set<int>& orders);

/// Maps a perplexity p >= 1 to 1 / (1 + ln p).
double fluency_from_perplexity(double perplexity);
double fluency_score(std::string_view text, PerplexityProvider& provider);

struct ComplexityConfig {
    int max_tokens = 100;
    int clause_cap = 5;
    int step_cap = 5;
    /// Marker phrases; multi-word entries match consecutive tokens.
    std::vector<std::string> clause_markers = default_clause_markers();
    std::vector<std::string> step_markers = default_step_markers();

    static std::vector<std::string> default_clause_markers();
    static std::vector<std::string> default_step_markers();
};

/// Occurrences of any marker phrase in the token stream.
std::size_t count_markers(const std::vector<std::string>& tokens,
                          const std::vector<std::string>& markers);

double complexity_score(std::string_view text, const ComplexityConfig& config);

/// Everything a plan may need to score texts.
struct MetricProviders {
    std::shared_ptr<EmbeddingProvider> embedder;
    std::shared_ptr<PerplexityProvider> perplexity;
    std::set<int> diversity_orders{1, 2};
    ComplexityConfig complexity;
};

/// One model output paired with the reference it should match.
struct OutputSample {
    std::string output;
    std::string reference;
};

/// Metric scores of a single output. Diversity uses only the orders the output is long enough for.
MetricScores score_output(const OutputSample& sample, const MetricPlan& plan,
                          const MetricProviders& providers);

/// Averages each plan metric over the samples and fuses the means.
ScoredPrompt score_prompt(const Prompt& prompt, const MetricPlan& plan,
                          const std::vector<OutputSample>& samples,
                          const MetricProviders& providers);

/// Throws Error naming the first plan metric without a configured provider.
void require_providers(const MetricPlan& plan, const MetricProviders& providers);

}  // namespace promptevo
