#pragma once

#include <map>
#include <string>
#include <utility>

#include "promptevo/error.hpp"

namespace promptevo::detail {

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Connection-level failure (refused, timed out, reset); worth retrying.
class TransportError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

/// Splits "scheme://host[:port]/path" into origin and path ("/" when absent).
std::pair<std::string, std::string> split_url(const std::string& url);

HttpResponse http_post(const std::string& origin, const std::string& path, const std::string& body,
                       const std::map<std::string, std::string>& headers, double timeout_seconds);

HttpResponse http_get(const std::string& origin, const std::string& path, double timeout_seconds);

std::string excerpt(const std::string& body, std::size_t limit = 200);

}  // namespace promptevo::detail
