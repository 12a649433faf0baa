#include "mc/http.hpp"

#include <algorithm>
#include <cctype>

#include <httplib.h>

#include "mc/errors.hpp"

namespace mc {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

void HttpHeaders::set(std::string name, std::string value) {
    values[lower(std::move(name))] = std::move(value);
}

std::optional<std::string> HttpHeaders::get(const std::string& name) const {
    auto it = values.find(lower(name));
    if (it == values.end()) return std::nullopt;
    return it->second;
}

namespace {

class SocketFetcher : public HttpFetcher {
public:
    HttpResponse get(const std::string& uri,
                     const RequestOptions& opts) override {
        auto scheme_end = uri.find("://");
        if (scheme_end == std::string::npos)
            throw NetworkTimeout("not an absolute URI: " + uri);
        auto path_start = uri.find('/', scheme_end + 3);
        std::string origin = path_start == std::string::npos
                                 ? uri
                                 : uri.substr(0, path_start);
        std::string path = path_start == std::string::npos
                               ? "/"
                               : uri.substr(path_start);

        httplib::Client client(origin);
        client.set_follow_location(false);
        client.set_connection_timeout(opts.timeout_ms / 1000,
                                      (opts.timeout_ms % 1000) * 1000);
        client.set_read_timeout(opts.timeout_ms / 1000,
                                (opts.timeout_ms % 1000) * 1000);

        httplib::Headers headers;
        if (opts.accept_datetime)
            headers.emplace("Accept-Datetime", *opts.accept_datetime);
        if (opts.accept) headers.emplace("Accept", *opts.accept);

        auto res = client.Get(path, headers);
        if (!res)
            throw NetworkTimeout("transport failure for " + uri + ": " +
                                 httplib::to_string(res.error()));
        HttpResponse out;
        out.status = res->status;
        for (const auto& [k, v] : res->headers) out.headers.set(k, v);
        out.body = res->body;
        return out;
    }
};

}  // namespace

std::unique_ptr<HttpFetcher> make_socket_fetcher() {
    return std::make_unique<SocketFetcher>();
}

}  // namespace mc
