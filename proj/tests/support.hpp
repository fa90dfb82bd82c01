#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>

#include "promptevo/error.hpp"
#include "promptevo/llm.hpp"

namespace promptevo::testing {

/// Completion provider backed by an arbitrary function of the user text.
class FunctionProvider final : public CompletionProvider {
public:
    using Fn = std::function<std::string(const CompletionRequest&)>;

    explicit FunctionProvider(Fn fn, std::string name = "function") : fn_(std::move(fn)), name_(std::move(name)) {}

    CompletionResult complete(const CompletionRequest& request) override {
        count_call();
        return {fn_(request), name_, false, std::chrono::milliseconds{0}};
    }
    std::string name() const override { return name_; }

private:
    Fn fn_;
    std::string name_;
};

inline std::shared_ptr<CompletionProvider> echo_provider() {
    return std::make_shared<FunctionProvider>([](const CompletionRequest& r) { return r.user_text; }, "echo");
}

inline std::shared_ptr<CompletionProvider> failing_provider() {
    return std::make_shared<FunctionProvider>(
        [](const CompletionRequest&) -> std::string { throw ProviderError("scripted outage"); }, "broken");
}

/// httplib server on an ephemeral localhost port, running on a background thread.
class StubServer {
public:
    StubServer() = default;
    StubServer(const StubServer&) = delete;
    StubServer& operator=(const StubServer&) = delete;

    httplib::Server& server() { return server_; }

    void start() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~StubServer() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

/// A localhost port nothing listens on; connections are refused immediately.
inline constexpr int kClosedPort = 1;

}  // namespace promptevo::testing
