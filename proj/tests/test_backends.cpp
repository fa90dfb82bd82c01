#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "promptevo/backends.hpp"
#include "promptevo/error.hpp"
#include "support.hpp"

using namespace promptevo;
using nlohmann::json;

namespace {

double norm(const EmbeddingVector& v) {
    double s = 0.0;
    for (double x : v.values) s += x * x;
    return std::sqrt(s);
}

/// Serves /embed and /perplexity from the offline providers, mirroring the service wire format.
struct FakeMetricService {
    testing::StubServer stub;
    HashEmbedder embedder;
    RepetitionPerplexity ppl;

    FakeMetricService() {
        stub.server().Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
            const auto body = json::parse(req.body);
            const auto texts = body.at("texts").get<std::vector<std::string>>();
            if (texts.empty()) {
                res.status = 400;
                return;
            }
            json vectors = json::array();
            for (const auto& v : embedder.embed(texts)) vectors.push_back(v.values);
            res.set_content(json{{"vectors", vectors}, {"dimension", HashEmbedder::kDimension}}.dump(),
                            "application/json");
        });
        stub.server().Post("/perplexity", [this](const httplib::Request& req, httplib::Response& res) {
            const auto text = json::parse(req.body).at("text").get<std::string>();
            res.set_content(json{{"perplexity", ppl.perplexity(text)}}.dump(), "application/json");
        });
        stub.server().Get("/health", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"status":"ok","dimension":256})", "application/json");
        });
        stub.start();
    }
};

/// Contract every embedding provider must meet.
void embedding_conformance(EmbeddingProvider& provider) {
    const std::vector<std::string> texts{"The cat sat on the mat.", "An entirely different sentence!", "x"};
    const auto first = provider.embed(texts);
    const auto second = provider.embed(texts);
    REQUIRE(first.size() == texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        CHECK(first[i].dimension() == provider.dimension());
        CHECK(norm(first[i]) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(first[i].values == second[i].values);
        // Order preserved: batch result equals the single-text result.
        CHECK(provider.embed_one(texts[i]).values == first[i].values);
    }
    CHECK(cosine(first[0], first[1]) == doctest::Approx(cosine(first[1], first[0])).epsilon(1e-15));
    CHECK(cosine(first[0], first[0]) == doctest::Approx(1.0).epsilon(1e-9));
}

void perplexity_conformance(PerplexityProvider& provider) {
    for (const std::string text : {"the cat sat on", "a a a a", "Hello.", "one two one two one two"}) {
        const double p = provider.perplexity(text);
        CHECK(std::isfinite(p));
        CHECK(p >= 1.0);
        CHECK(provider.perplexity(text) == p);
    }
}

}  // namespace

TEST_CASE("hash embedder") {
    HashEmbedder e;
    CHECK(e.dimension() == 256);
    CHECK(e.embed_one("Five apples").values == e.embed_one("five   APPLES").values);
    CHECK(cosine(e.embed_one("cat"), e.embed_one("dog")) == 0.0);
    CHECK(cosine(e.embed_one("red green"), e.embed_one("blue yellow")) == 0.0);
    CHECK_THROWS_AS(e.embed_one("   "), ProviderError);
}

TEST_CASE("repetition perplexity proxy") {
    RepetitionPerplexity p;
    CHECK(p.perplexity("a a a a") == doctest::Approx(67.0).epsilon(1e-12));
    CHECK(p.perplexity("the cat sat on") == 1.0);
    CHECK(p.perplexity("single") == 1.0);
    CHECK(p.perplexity("a b a b") > p.perplexity("a b c d"));
    CHECK_THROWS_AS(p.perplexity(""), ProviderError);
}

TEST_CASE("provider conformance: offline providers") {
    HashEmbedder e;
    RepetitionPerplexity p;
    embedding_conformance(e);
    perplexity_conformance(p);
}

TEST_CASE("provider conformance: metric service client over HTTP") {
    FakeMetricService service;
    MetricServiceClient client({service.stub.url(), 256, 5.0, nullptr});
    embedding_conformance(client);
    perplexity_conformance(client);
    CHECK(json::parse(client.health()).at("dimension") == 256);

    // Same numbers as the in-process providers.
    HashEmbedder local;
    CHECK(client.embed_one("five apples").values == local.embed_one("five apples").values);
    CHECK(client.perplexity("a a a a") == doctest::Approx(67.0));
}

TEST_CASE("metric service client learns the dimension when unset") {
    FakeMetricService service;
    MetricServiceClient client({service.stub.url(), 0, 5.0, nullptr});
    CHECK(client.dimension() == 0);
    client.embed_one("hello");
    CHECK(client.dimension() == 256);
}

TEST_CASE("metric service contract violations") {
    testing::StubServer stub;
    stub.server().Post("/perplexity", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"perplexity":0.5})", "application/json");
    });
    stub.server().Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
        const auto n = json::parse(req.body).at("texts").size();
        json vectors = json::array();
        for (std::size_t i = 0; i < n; ++i) vectors.push_back(std::vector<double>{0.6, 0.8});
        res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
    });
    stub.start();

    MetricServiceClient client({stub.url(), 256, 5.0, nullptr});
    CHECK_THROWS_AS(client.perplexity("hello"), ProviderError);
    CHECK_THROWS_WITH_AS(client.embed_one("hello"), doctest::Contains("dimension"), ProviderError);

    MetricServiceClient unreachable({"http://127.0.0.1:" + std::to_string(testing::kClosedPort), 256, 2.0, nullptr});
    CHECK_THROWS_AS(unreachable.embed_one("hello"), ProviderError);
    CHECK_THROWS_AS(unreachable.perplexity("hello"), ProviderError);
}

TEST_CASE("metric service errors and non-unit vectors") {
    testing::StubServer stub;
    stub.server().Post("/embed", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"vectors":[[3.0, 4.0]]})", "application/json");
    });
    stub.server().Post("/perplexity", [](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
        res.set_content("model crashed", "text/plain");
    });
    stub.start();
    MetricServiceClient client({stub.url(), 2, 5.0, nullptr});
    CHECK_THROWS_WITH_AS(client.embed_one("hello"), doctest::Contains("unit norm"), ProviderError);
    CHECK_THROWS_WITH_AS(client.perplexity("hello"), doctest::Contains("500"), ProviderError);
}
