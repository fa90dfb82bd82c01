#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace promptevo {

struct CompletionRequest {
    std::optional<std::string> system_text;
    std::string user_text;
    double temperature = 0.1;
    int max_tokens = 512;
    std::string model_name;
};

/// Throws Error unless user_text is non-empty, 0 <= temperature <= 2 and max_tokens > 0.
void validate(const CompletionRequest& request);

struct CompletionResult {
    std::string text;
    std::string provider_name;
    bool cached = false;
    std::chrono::milliseconds latency{0};
};

class CompletionProvider {
public:
    virtual ~CompletionProvider() = default;

    virtual CompletionResult complete(const CompletionRequest& request) = 0;
    virtual std::string name() const = 0;

    /// Number of complete() calls that reached this provider.
    std::size_t call_count() const { return calls_.load(); }

protected:
    void count_call() { ++calls_; }

private:
    std::atomic<std::size_t> calls_{0};
};

struct MockRule {
    std::string pattern;
    std::string response;
};

/// Scripted responses: the first rule whose pattern is a substring of user_text wins.
/// `{input}` in a response expands to the request's user_text.
struct MockScript {
    std::vector<MockRule> rules;
    std::string default_response;
};

/// Reads {"rules":[{"pattern":..,"response":..}...],"default":..}.
MockScript load_mock_script(const std::string& path);

class MockProvider final : public CompletionProvider {
public:
    explicit MockProvider(MockScript script) : script_(std::move(script)) {}

    CompletionResult complete(const CompletionRequest& request) override;
    std::string name() const override { return "mock"; }

private:
    MockScript script_;
};

/// Caps the number of concurrent outbound HTTP requests.
class InflightLimiter {
public:
    explicit InflightLimiter(std::size_t max_inflight);

    void acquire();
    void release();

    class Slot {
    public:
        explicit Slot(InflightLimiter* limiter) : limiter_(limiter) {
            if (limiter_) limiter_->acquire();
        }
        ~Slot() {
            if (limiter_) limiter_->release();
        }
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;

    private:
        InflightLimiter* limiter_;
    };

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::size_t available_;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;

    /// Delay before attempt `attempt` (1-based; attempt 1 has none).
    std::chrono::milliseconds delay_before(int attempt) const;
};

struct HttpChatOptions {
    /// Full URL of the chat-completions endpoint, e.g. https://api.openai.com/v1/chat/completions
    std::string endpoint;
    std::string api_key;
    double timeout_seconds = 60.0;
    RetryPolicy retry;
    std::shared_ptr<InflightLimiter> limiter;
    std::string provider_name = "http-chat";
};

/// Chat-completions client: POSTs {model, messages, temperature, max_tokens} and returns
/// choices[0].message.content. Transport failures are retried; HTTP errors are not.
class HttpChatProvider final : public CompletionProvider {
public:
    explicit HttpChatProvider(HttpChatOptions options);

    CompletionResult complete(const CompletionRequest& request) override;
    std::string name() const override { return options_.provider_name; }

    static std::string build_body(const CompletionRequest& request);
    static std::string parse_content(std::string_view body);

private:
    HttpChatOptions options_;
    std::string origin_;
    std::string path_;
};

class KeyValueStore {
public:
    virtual ~KeyValueStore() = default;
    virtual std::optional<std::string> get(const std::string& key) = 0;
    /// Throws on write failure.
    virtual void put(const std::string& key, const std::string& value) = 0;
};

class MemoryStore final : public KeyValueStore {
public:
    std::optional<std::string> get(const std::string& key) override;
    void put(const std::string& key, const std::string& value) override;

private:
    std::mutex mu_;
    std::map<std::string, std::string> entries_;
};

/// Append-only JSON-lines file; loaded on construction. An unreadable file starts empty.
class FileStore final : public KeyValueStore {
public:
    explicit FileStore(std::string path);

    std::optional<std::string> get(const std::string& key) override;
    void put(const std::string& key, const std::string& value) override;

private:
    std::string path_;
    std::mutex mu_;
    std::map<std::string, std::string> entries_;
};

/// Unambiguous cache key over provider, model, temperature, system and user text.
std::string cache_key(std::string_view provider_name, const CompletionRequest& request);

using WarningSink = std::function<void(std::string_view)>;

/// Memoizes another provider. Store failures degrade to pass-through with a warning.
class CachingProvider final : public CompletionProvider {
public:
    CachingProvider(std::shared_ptr<CompletionProvider> inner, std::shared_ptr<KeyValueStore> store,
                    WarningSink warn = {});

    CompletionResult complete(const CompletionRequest& request) override;
    std::string name() const override { return inner_->name(); }

private:
    std::shared_ptr<CompletionProvider> inner_;
    std::shared_ptr<KeyValueStore> store_;
    WarningSink warn_;
    std::mutex mu_;
    std::map<std::string, std::shared_future<std::string>> pending_;
};

std::shared_ptr<CompletionProvider> with_cache(std::shared_ptr<CompletionProvider> inner,
                                               std::shared_ptr<KeyValueStore> store,
                                               WarningSink warn = {});

}  // namespace promptevo
