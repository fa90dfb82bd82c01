#include "promptevo/llm.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "http.hpp"
#include "promptevo/error.hpp"
#include "promptevo/text.hpp"

namespace promptevo {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

void validate(const CompletionRequest& request) {
    if (request.user_text.empty()) throw Error("completion request has empty user text");
    if (!std::isfinite(request.temperature) || request.temperature < 0.0 || request.temperature > 2.0)
        throw Error(fmt::format("temperature {} outside [0, 2]", request.temperature));
    if (request.max_tokens <= 0) throw Error("max_tokens must be positive");
}

MockScript load_mock_script(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read mock script " + path);
    MockScript script;
    try {
        const auto doc = json::parse(in);
        for (const auto& rule : doc.value("rules", json::array())) {
            script.rules.push_back({rule.at("pattern").get<std::string>(), rule.at("response").get<std::string>()});
        }
        script.default_response = doc.value("default", std::string{});
    } catch (const json::exception& e) {
        throw ConfigError("invalid mock script " + path + ": " + e.what());
    }
    return script;
}

CompletionResult MockProvider::complete(const CompletionRequest& request) {
    validate(request);
    count_call();
    const std::string* response = &script_.default_response;
    for (const auto& rule : script_.rules) {
        if (request.user_text.find(rule.pattern) != std::string::npos) {
            response = &rule.response;
            break;
        }
    }
    return {render_template(*response, {{"input", request.user_text}}), name(), false,
            std::chrono::milliseconds{0}};
}

InflightLimiter::InflightLimiter(std::size_t max_inflight) : available_(max_inflight) {
    if (max_inflight == 0) throw ConfigError("in-flight limit must be positive");
}

void InflightLimiter::acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return available_ > 0; });
    --available_;
}

void InflightLimiter::release() {
    {
        std::lock_guard lock(mu_);
        ++available_;
    }
    cv_.notify_one();
}

std::chrono::milliseconds RetryPolicy::delay_before(int attempt) const {
    if (attempt <= 1) return std::chrono::milliseconds{0};
    const double factor = std::pow(multiplier, attempt - 2);
    return std::chrono::milliseconds{static_cast<long long>(static_cast<double>(initial_backoff.count()) * factor)};
}

HttpChatProvider::HttpChatProvider(HttpChatOptions options) : options_(std::move(options)) {
    if (options_.retry.max_attempts < 1 || options_.retry.max_attempts > 3)
        throw ConfigError("retry attempts must be between 1 and 3");
    std::tie(origin_, path_) = detail::split_url(options_.endpoint);
}

std::string HttpChatProvider::build_body(const CompletionRequest& request) {
    json messages = json::array();
    if (request.system_text) messages.push_back({{"role", "system"}, {"content", *request.system_text}});
    messages.push_back({{"role", "user"}, {"content", request.user_text}});
    const json body = {{"model", request.model_name},
                       {"messages", messages},
                       {"temperature", request.temperature},
                       {"max_tokens", request.max_tokens}};
    return body.dump();
}

std::string HttpChatProvider::parse_content(std::string_view body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed chat-completion JSON: ") + e.what());
    }
    const auto choices = doc.find("choices");
    if (choices == doc.end() || !choices->is_array() || choices->empty())
        throw ProviderError("chat-completion response has no choices");
    const auto& first = (*choices)[0];
    if (!first.contains("message") || !first["message"].contains("content") ||
        !first["message"]["content"].is_string())
        throw ProviderError("chat-completion choice has no message content");
    return first["message"]["content"].get<std::string>();
}

CompletionResult HttpChatProvider::complete(const CompletionRequest& request) {
    validate(request);
    count_call();
    const auto body = build_body(request);
    std::map<std::string, std::string> headers;
    if (!options_.api_key.empty()) headers["Authorization"] = "Bearer " + options_.api_key;

    const auto start = Clock::now();
    for (int attempt = 1;; ++attempt) {
        std::this_thread::sleep_for(options_.retry.delay_before(attempt));
        detail::HttpResponse response;
        try {
            InflightLimiter::Slot slot(options_.limiter.get());
            response = detail::http_post(origin_, path_, body, headers, options_.timeout_seconds);
        } catch (const detail::TransportError& e) {
            if (attempt >= options_.retry.max_attempts)
                throw ProviderError(fmt::format("{} (gave up after {} attempts)", e.what(), attempt));
            continue;
        }
        if (response.status < 200 || response.status >= 300)
            throw ProviderError(fmt::format("chat endpoint returned HTTP {}: {}", response.status,
                                            detail::excerpt(response.body)));
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
        return {parse_content(response.body), name(), false, elapsed};
    }
}

std::optional<std::string> MemoryStore::get(const std::string& key) {
    std::lock_guard lock(mu_);
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void MemoryStore::put(const std::string& key, const std::string& value) {
    std::lock_guard lock(mu_);
    entries_[key] = value;
}

FileStore::FileStore(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            const auto row = json::parse(line);
            entries_[row.at("key").get<std::string>()] = row.at("value").get<std::string>();
        } catch (const json::exception&) {
            // A torn final line from an interrupted run; later entries still load.
        }
    }
}

std::optional<std::string> FileStore::get(const std::string& key) {
    std::lock_guard lock(mu_);
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void FileStore::put(const std::string& key, const std::string& value) {
    std::lock_guard lock(mu_);
    entries_[key] = value;
    std::ofstream out(path_, std::ios::app);
    out << json{{"key", key}, {"value", value}}.dump() << '\n';
    out.flush();
    if (!out) throw Error("cannot append to cache file " + path_);
}

std::string cache_key(std::string_view provider_name, const CompletionRequest& request) {
    // Length-prefixed fields; the system slot distinguishes "absent" from "empty".
    std::string key;
    auto field = [&key](std::string_view tag, std::string_view value) {
        key += fmt::format("{}:{}:", tag, value.size());
        key += value;
        key += ';';
    };
    field("p", provider_name);
    field("m", request.model_name);
    field("t", fmt::format("{}", request.temperature));
    if (request.system_text)
        field("s", *request.system_text);
    else
        key += "s:-;";
    field("u", request.user_text);
    return key;
}

CachingProvider::CachingProvider(std::shared_ptr<CompletionProvider> inner,
                                 std::shared_ptr<KeyValueStore> store, WarningSink warn)
    : inner_(std::move(inner)), store_(std::move(store)), warn_(std::move(warn)) {
    if (!warn_) warn_ = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
}

CompletionResult CachingProvider::complete(const CompletionRequest& request) {
    validate(request);
    count_call();
    const auto key = cache_key(inner_->name(), request);
    const auto start = Clock::now();

    std::optional<std::string> hit;
    try {
        hit = store_->get(key);
    } catch (const std::exception& e) {
        warn_(std::string("cache read failed: ") + e.what());
    }
    if (hit) return {*hit, name(), true, std::chrono::milliseconds{0}};

    // Concurrent identical requests share one inner call.
    std::promise<std::string> promise;
    std::shared_future<std::string> future;
    bool owner = false;
    {
        std::lock_guard lock(mu_);
        const auto it = pending_.find(key);
        if (it != pending_.end()) {
            future = it->second;
        } else {
            future = promise.get_future().share();
            pending_.emplace(key, future);
            owner = true;
        }
    }
    if (!owner) return {future.get(), name(), true, std::chrono::milliseconds{0}};

    std::string text;
    try {
        text = inner_->complete(request).text;
    } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard lock(mu_);
        pending_.erase(key);
        throw;
    }
    try {
        store_->put(key, text);
    } catch (const std::exception& e) {
        warn_(std::string("cache write failed: ") + e.what());
    }
    promise.set_value(text);
    {
        std::lock_guard lock(mu_);
        pending_.erase(key);
    }
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
    return {std::move(text), name(), false, elapsed};
}

std::shared_ptr<CompletionProvider> with_cache(std::shared_ptr<CompletionProvider> inner,
                                               std::shared_ptr<KeyValueStore> store, WarningSink warn) {
    return std::make_shared<CachingProvider>(std::move(inner), std::move(store), std::move(warn));
}

}  // namespace promptevo
