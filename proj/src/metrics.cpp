#include "promptevo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "promptevo/error.hpp"
#include "promptevo/text.hpp"

namespace promptevo {

std::string_view to_string(MetricKind kind) {
    switch (kind) {
        case MetricKind::similarity: return "similarity";
        case MetricKind::diversity: return "diversity";
        case MetricKind::fluency: return "fluency";
        case MetricKind::complexity: return "complexity";
    }
    return "?";
}

std::optional<MetricKind> try_parse_metric_kind(std::string_view name) {
    const auto lowered = to_lower(name);
    for (const auto kind : kAllMetricKinds) {
        if (lowered == to_string(kind)) return kind;
    }
    return std::nullopt;
}

MetricKind parse_metric_kind(std::string_view name) {
    if (auto kind = try_parse_metric_kind(name)) return *kind;
    throw Error("unknown metric '" + std::string(name) + "'");
}

bool MetricPlan::contains(MetricKind kind) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const PlanEntry& e) { return e.kind == kind; });
}

double MetricPlan::weight(MetricKind kind) const {
    for (const auto& e : entries_) {
        if (e.kind == kind) return e.weight;
    }
    return 0.0;
}

MetricPlan normalize_weights(const std::vector<std::pair<MetricKind, double>>& raw) {
    if (raw.empty()) throw Error("metric plan needs at least one metric");
    if (raw.size() > std::size(kAllMetricKinds)) throw Error("metric plan has more than four entries");
    std::set<MetricKind> seen;
    double total = 0.0;
    for (const auto& [kind, w] : raw) {
        if (!seen.insert(kind).second)
            throw Error("duplicate metric '" + std::string(to_string(kind)) + "' in plan");
        if (!std::isfinite(w) || w <= 0.0)
            throw Error("metric '" + std::string(to_string(kind)) + "' has non-positive weight");
        total += w;
    }
    if (!std::isfinite(total)) throw Error("metric weights overflow");
    MetricPlan plan;
    plan.entries_.reserve(raw.size());
    for (const auto& [kind, w] : raw) plan.entries_.push_back({kind, w / total});
    return plan;
}

double fuse_scores(const MetricPlan& plan, const MetricScores& scores) {
    if (plan.size() == 0) throw Error("cannot fuse scores under an empty plan");
    double fused = 0.0;
    for (const auto& [kind, weight] : plan.entries()) {
        const auto it = scores.find(kind);
        if (it == scores.end()) throw Error("missing score for metric '" + std::string(to_string(kind)) + "'");
        if (!std::isfinite(it->second))
            throw Error("non-finite score for metric '" + std::string(to_string(kind)) + "'");
        fused += weight * it->second;
    }
    return fused;
}

double similarity_score(std::string_view candidate, std::string_view reference,
                        EmbeddingProvider& embedder) {
    if (trim(candidate).empty() || trim(reference).empty())
        throw Error("similarity needs two non-empty texts");
    const std::vector<std::string> texts{std::string(candidate), std::string(reference)};
    const auto vectors = embedder.embed(texts);
    if (vectors.size() != 2) throw ProviderError("embedding provider returned the wrong number of vectors");
    check_embedding(vectors[0], embedder.dimension());
    check_embedding(vectors[1], embedder.dimension());
    return std::clamp(cosine(vectors[0], vectors[1]), 0.0, 1.0);
}

double diversity_score(std::string_view text, const std::set<int>& orders) {
    if (orders.empty()) throw Error("diversity needs at least one n-gram order");
    if (*orders.begin() < 1) throw Error("n-gram orders must be positive");
    const auto tokens = tokenize(text);
    const auto largest = static_cast<std::size_t>(*orders.rbegin());
    if (tokens.size() < largest)
        throw Error("text has " + std::to_string(tokens.size()) + " tokens, fewer than n=" +
                    std::to_string(largest));
    double sum = 0.0;
    for (const int order : orders) {
        const auto n = static_cast<std::size_t>(order);
        std::set<std::vector<std::string>> unique;
        const std::size_t total = tokens.size() - n + 1;
        for (std::size_t i = 0; i < total; ++i) unique.emplace(tokens.begin() + i, tokens.begin() + i + n);
        sum += static_cast<double>(unique.size()) / static_cast<double>(total);
    }
    return sum / static_cast<double>(orders.size());
}

double fluency_from_perplexity(double perplexity) {
    return 1.0 / (1.0 + std::log(check_perplexity(perplexity)));
}

double fluency_score(std::string_view text, PerplexityProvider& provider) {
    if (trim(text).empty()) throw Error("fluency needs non-empty text");
    return fluency_from_perplexity(provider.perplexity(std::string(text)));
}

std::vector<std::string> ComplexityConfig::default_clause_markers() {
    return {"because", "since", "although", "though", "while", "whereas", "if", "unless",
            "which", "therefore", "however", "so that", "in order to", "but"};
}

std::vector<std::string> ComplexityConfig::default_step_markers() {
    return {"first", "second", "third", "then", "next", "finally", "lastly", "step", "after that",
            "afterwards"};
}

std::size_t count_markers(const std::vector<std::string>& tokens, const std::vector<std::string>& markers) {
    std::vector<std::vector<std::string>> phrases;
    for (const auto& m : markers) {
        auto phrase = tokenize(m);
        if (!phrase.empty()) phrases.push_back(std::move(phrase));
    }
    std::size_t count = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        for (const auto& phrase : phrases) {
            if (i + phrase.size() <= tokens.size() &&
                std::equal(phrase.begin(), phrase.end(), tokens.begin() + i)) {
                ++count;
                break;
            }
        }
    }
    return count;
}

double complexity_score(std::string_view text, const ComplexityConfig& config) {
    if (trim(text).empty()) throw Error("complexity needs non-empty text");
    if (config.max_tokens <= 0 || config.clause_cap <= 0 || config.step_cap <= 0)
        throw Error("complexity caps must be positive");
    const auto tokens = tokenize(text);
    auto capped = [](std::size_t count, int cap) {
        return std::min(1.0, static_cast<double>(count) / static_cast<double>(cap));
    };
    const double length = capped(tokens.size(), config.max_tokens);
    const double clauses = capped(count_markers(tokens, config.clause_markers), config.clause_cap);
    const double steps = capped(count_markers(tokens, config.step_markers), config.step_cap);
    return (length + clauses + steps) / 3.0;
}

void require_providers(const MetricPlan& plan, const MetricProviders& providers) {
    if (plan.contains(MetricKind::similarity) && !providers.embedder)
        throw Error("plan uses similarity but no embedding provider is configured");
    if (plan.contains(MetricKind::fluency) && !providers.perplexity)
        throw Error("plan uses fluency but no perplexity provider is configured");
}

MetricScores score_output(const OutputSample& sample, const MetricPlan& plan,
                          const MetricProviders& providers) {
    require_providers(plan, providers);
    MetricScores scores;
    for (const auto& [kind, weight] : plan.entries()) {
        switch (kind) {
            case MetricKind::similarity:
                scores[kind] = similarity_score(sample.output, sample.reference, *providers.embedder);
                break;
            case MetricKind::diversity: {
                const auto length = static_cast<int>(tokenize(sample.output).size());
                std::set<int> orders;
                for (const int n : providers.diversity_orders) {
                    if (n <= length) orders.insert(n);
                }
                if (orders.empty()) orders = providers.diversity_orders;  // reports the length error
                scores[kind] = diversity_score(sample.output, orders);
                break;
            }
            case MetricKind::fluency:
                scores[kind] = fluency_score(sample.output, *providers.perplexity);
                break;
            case MetricKind::complexity:
                scores[kind] = complexity_score(sample.output, providers.complexity);
                break;
        }
    }
    return scores;
}

ScoredPrompt score_prompt(const Prompt& prompt, const MetricPlan& plan,
                          const std::vector<OutputSample>& samples, const MetricProviders& providers) {
    require_providers(plan, providers);
    if (samples.empty()) throw Error("cannot score prompt '" + prompt.id + "' without samples");
    MetricScores sums;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        MetricScores item;
        try {
            item = score_output(samples[i], plan, providers);
        } catch (const std::exception& e) {
            throw Error("scoring prompt '" + prompt.id + "' on sample " + std::to_string(i) + ": " + e.what());
        }
        for (const auto& [kind, value] : item) sums[kind] += value;
    }
    ScoredPrompt scored{prompt, {}, 0.0};
    for (const auto& [kind, sum] : sums) scored.scores[kind] = sum / static_cast<double>(samples.size());
    scored.fused = fuse_scores(plan, scored.scores);
    return scored;
}

}  // namespace promptevo
