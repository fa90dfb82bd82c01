#include "promptevo/backends.hpp"

#include <cmath>
#include <cstdint>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

#include "http.hpp"
#include "promptevo/error.hpp"
#include "promptevo/llm.hpp"
#include "promptevo/text.hpp"

namespace promptevo {

using nlohmann::json;

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension())
        throw ProviderError("embedding dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                            std::to_string(b.dimension()));
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
    return dot;
}

void check_embedding(const EmbeddingVector& v, std::size_t dimension) {
    if (v.dimension() != dimension)
        throw ProviderError("embedding has dimension " + std::to_string(v.dimension()) + ", expected " +
                            std::to_string(dimension));
    double norm2 = 0.0;
    for (const double x : v.values) {
        if (!std::isfinite(x)) throw ProviderError("embedding contains a non-finite value");
        norm2 += x * x;
    }
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-6)
        throw ProviderError("embedding is not unit norm (norm " + std::to_string(std::sqrt(norm2)) + ")");
}

double check_perplexity(double p) {
    if (!std::isfinite(p) || p < 1.0)
        throw ProviderError("perplexity must be finite and >= 1, got " + std::to_string(p));
    return p;
}

EmbeddingVector EmbeddingProvider::embed_one(const std::string& text) {
    auto vectors = embed(std::span<const std::string>(&text, 1));
    if (vectors.size() != 1) throw ProviderError("embedding provider returned " +
                                                 std::to_string(vectors.size()) + " vectors for 1 text");
    return std::move(vectors.front());
}

namespace {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

void require_text(const std::string& text) {
    if (trim(text).empty()) throw ProviderError("cannot score empty text");
}

}  // namespace

std::vector<EmbeddingVector> HashEmbedder::embed(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        require_text(text);
        EmbeddingVector v{std::vector<double>(kDimension, 0.0)};
        for (const auto& token : tokenize(text)) v.values[fnv1a64(token) % kDimension] += 1.0;
        double norm2 = 0.0;
        for (const double x : v.values) norm2 += x * x;
        const double norm = std::sqrt(norm2);
        for (double& x : v.values) x /= norm;
        out.push_back(std::move(v));
    }
    return out;
}

double RepetitionPerplexity::perplexity(const std::string& text) {
    require_text(text);
    const auto tokens = tokenize(text);
    if (tokens.size() < 2) return 1.0;
    std::set<std::pair<std::string, std::string>> seen;
    std::size_t repeats = 0;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        if (!seen.emplace(tokens[i], tokens[i + 1]).second) ++repeats;
    }
    const double fraction = static_cast<double>(repeats) / static_cast<double>(tokens.size() - 1);
    return 1.0 + fraction * 99.0;
}

MetricServiceClient::MetricServiceClient(MetricServiceOptions options)
    : options_(std::move(options)), dimension_(options_.dimension) {
    detail::split_url(options_.base_url);
}

std::size_t MetricServiceClient::dimension() const { return dimension_.load(); }

std::string MetricServiceClient::post(const std::string& path, const std::string& body) {
    InflightLimiter::Slot slot(options_.limiter.get());
    const auto response = detail::http_post(options_.base_url, path, body, {}, options_.timeout_seconds);
    if (response.status < 200 || response.status >= 300)
        throw ProviderError("metric service " + path + " returned HTTP " + std::to_string(response.status) +
                            ": " + detail::excerpt(response.body));
    return response.body;
}

std::vector<EmbeddingVector> MetricServiceClient::embed(std::span<const std::string> texts) {
    for (const auto& t : texts) require_text(t);
    const json request = {{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
    json reply;
    try {
        reply = json::parse(post("/embed", request.dump()));
    } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed /embed response: ") + e.what());
    }
    if (!reply.contains("vectors") || !reply["vectors"].is_array())
        throw ProviderError("/embed response lacks a 'vectors' array");
    const auto& vectors = reply["vectors"];
    if (vectors.size() != texts.size())
        throw ProviderError("/embed returned " + std::to_string(vectors.size()) + " vectors for " +
                            std::to_string(texts.size()) + " texts");
    std::vector<EmbeddingVector> out;
    out.reserve(vectors.size());
    for (const auto& row : vectors) {
        EmbeddingVector v;
        try {
            v.values = row.get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw ProviderError(std::string("malformed /embed vector: ") + e.what());
        }
        std::size_t expected = dimension_.load();
        if (expected == 0) {
            dimension_.compare_exchange_strong(expected, v.dimension());
            expected = dimension_.load();
        }
        check_embedding(v, expected);
        out.push_back(std::move(v));
    }
    return out;
}

double MetricServiceClient::perplexity(const std::string& text) {
    require_text(text);
    const json request = {{"text", text}};
    try {
        const auto reply = json::parse(post("/perplexity", request.dump()));
        if (!reply.contains("perplexity") || !reply["perplexity"].is_number())
            throw ProviderError("/perplexity response lacks a numeric 'perplexity'");
        return check_perplexity(reply["perplexity"].get<double>());
    } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed /perplexity response: ") + e.what());
    }
}

std::string MetricServiceClient::health() {
    const auto response = detail::http_get(options_.base_url, "/health", options_.timeout_seconds);
    if (response.status != 200)
        throw ProviderError("metric service /health returned HTTP " + std::to_string(response.status));
    return response.body;
}

}  // namespace promptevo
