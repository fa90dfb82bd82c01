#include "http.hpp"

#include <httplib.h>

namespace promptevo::detail {

namespace {

void configure(httplib::Client& client, double timeout_seconds) {
    const auto secs = static_cast<time_t>(timeout_seconds);
    const auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
}

HttpResponse unwrap(const httplib::Result& result, const std::string& origin, const std::string& path) {
    if (!result)
        throw TransportError("request to " + origin + path + " failed: " + httplib::to_string(result.error()));
    return HttpResponse{result->status, result->body};
}

}  // namespace

std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ConfigError("URL without scheme: " + url);
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

HttpResponse http_post(const std::string& origin, const std::string& path, const std::string& body,
                       const std::map<std::string, std::string>& headers, double timeout_seconds) {
    httplib::Client client(origin);
    configure(client, timeout_seconds);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    return unwrap(client.Post(path, h, body, "application/json"), origin, path);
}

HttpResponse http_get(const std::string& origin, const std::string& path, double timeout_seconds) {
    httplib::Client client(origin);
    configure(client, timeout_seconds);
    return unwrap(client.Get(path), origin, path);
}

std::string excerpt(const std::string& body, std::size_t limit) {
    if (body.size() <= limit) return body;
    return body.substr(0, limit) + "...";
}

}  // namespace promptevo::detail
