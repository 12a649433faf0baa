#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

namespace mc {

struct HttpHeaders {
    // Case-insensitive lookup, stored lowercased.
    std::map<std::string, std::string> values;

    void set(std::string name, std::string value);
    std::optional<std::string> get(const std::string& name) const;
};

struct HttpResponse {
    int status = 0;
    HttpHeaders headers;
    std::string body;
};

struct RequestOptions {
    std::optional<std::string> accept_datetime;  // RFC 1123 instant
    std::optional<std::string> accept;           // media-type negotiation
    int timeout_ms = 25 * 60 * 1000;
};

// Single-transaction HTTP client. Implementations never follow redirects.
// Throws NetworkTimeout on transport failure.
class HttpFetcher {
public:
    virtual ~HttpFetcher() = default;
    virtual HttpResponse get(const std::string& uri,
                             const RequestOptions& opts = {}) = 0;
};

// Socket-backed fetcher (cpp-httplib).
std::unique_ptr<HttpFetcher> make_socket_fetcher();

}  // namespace mc
