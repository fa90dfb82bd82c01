#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace promptevo {

class InflightLimiter;

/// Unit-norm embedding of one text.
struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dimension() const { return values.size(); }
};

/// Dot product of two unit vectors. Throws on dimension mismatch.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// Throws ProviderError unless the vector is finite, of `dimension`, and unit norm within 1e-6.
void check_embedding(const EmbeddingVector& v, std::size_t dimension);

/// Throws ProviderError unless p is finite and >= 1.
double check_perplexity(double p);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    /// One vector per input text, order preserved. Texts must be non-empty.
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::string name() const = 0;

    EmbeddingVector embed_one(const std::string& text);
};

class PerplexityProvider {
public:
    virtual ~PerplexityProvider() = default;

    /// Perplexity >= 1 of a non-empty text.
    virtual double perplexity(const std::string& text) = 0;
    virtual std::string name() const = 0;
};

/// Offline bag-of-words embedder: each token is hashed with 64-bit FNV-1a into one
/// of 256 buckets, counts are L2-normalized. Identified as "fnv1a64-bow-256-v1".
class HashEmbedder final : public EmbeddingProvider {
public:
    static constexpr std::size_t kDimension = 256;
    static constexpr const char* kVersion = "fnv1a64-bow-256-v1";

    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
    std::size_t dimension() const override { return kDimension; }
    std::string name() const override { return kVersion; }
};

/// Test-only perplexity proxy: 1 + 99 * (fraction of bigrams repeating an earlier bigram).
/// Not a language model; it only ranks repetitive text as less fluent.
class RepetitionPerplexity final : public PerplexityProvider {
public:
    double perplexity(const std::string& text) override;
    std::string name() const override { return "repetition-proxy-v1"; }
};

struct MetricServiceOptions {
    std::string base_url = "http://127.0.0.1:8088";
    /// Expected embedding dimension; 0 accepts whatever the service reports first.
    std::size_t dimension = 0;
    double timeout_seconds = 30.0;
    std::shared_ptr<InflightLimiter> limiter;
};

/// Client for the metric-model service (POST /embed, POST /perplexity, GET /health).
class MetricServiceClient final : public EmbeddingProvider, public PerplexityProvider {
public:
    explicit MetricServiceClient(MetricServiceOptions options);

    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
    std::size_t dimension() const override;
    double perplexity(const std::string& text) override;
    std::string name() const override { return "metric-service"; }

    /// Raw /health body.
    std::string health();

private:
    std::string post(const std::string& path, const std::string& body);

    MetricServiceOptions options_;
    std::atomic<std::size_t> dimension_;
};

}  // namespace promptevo
