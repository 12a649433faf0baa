#include "mc/uri_canon.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <vector>

#include "mc/errors.hpp"

namespace mc {

namespace {

// Multi-label public suffixes the two-label heuristic would get wrong.
const std::array<const char*, 10> kMultiLabelSuffixes = {
    "co.uk", "ac.uk", "gov.uk", "org.uk", "co.jp",
    "com.au", "net.au", "org.au", "co.nz", "com.br"};

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::vector<std::string> split_labels(const std::string& host) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= host.size()) {
        auto dot = host.find('.', start);
        if (dot == std::string::npos) {
            out.push_back(host.substr(start));
            break;
        }
        out.push_back(host.substr(start, dot - start));
        start = dot + 1;
    }
    return out;
}

bool ends_with_suffix(const std::string& host, const std::string& suffix) {
    if (host.size() <= suffix.size()) return false;
    return host.compare(host.size() - suffix.size(), suffix.size(), suffix) == 0 &&
           host[host.size() - suffix.size() - 1] == '.';
}

std::string registered_domain(const std::string& host) {
    auto labels = split_labels(host);
    std::size_t keep = 2;
    for (const char* sfx : kMultiLabelSuffixes) {
        if (ends_with_suffix(host, sfx) || host == sfx) {
            keep = 3;
            break;
        }
    }
    if (labels.size() <= keep) return host;
    std::string out;
    for (std::size_t i = labels.size() - keep; i < labels.size(); ++i) {
        if (!out.empty()) out += '.';
        out += labels[i];
    }
    return out;
}

std::string uppercase_percent(std::string s) {
    for (std::size_t i = 0; i + 2 < s.size(); ++i) {
        if (s[i] == '%') {
            s[i + 1] = char(std::toupper(static_cast<unsigned char>(s[i + 1])));
            s[i + 2] = char(std::toupper(static_cast<unsigned char>(s[i + 2])));
        }
    }
    return s;
}

int default_port(Scheme s) { return s == Scheme::http ? 80 : 443; }

}  // namespace

const char* to_string(Scheme s) { return s == Scheme::http ? "http" : "https"; }

const char* to_string(Subdomain s) {
    switch (s) {
        case Subdomain::none: return "none";
        case Subdomain::www: return "www";
        default: return "other";
    }
}

std::string ParsedUri::to_string() const {
    std::string out = mc::to_string(scheme);
    out += "://";
    out += host;
    if (port) {
        out += ':';
        out += std::to_string(*port);
    }
    out += path;
    if (query) {
        out += '?';
        out += *query;
    }
    if (fragment) {
        out += '#';
        out += *fragment;
    }
    return out;
}

ParsedUri parse_uri(const std::string& raw) {
    if (raw.empty()) throw MalformedUri("empty URI");
    auto sep = raw.find("://");
    if (sep == std::string::npos || sep == 0)
        throw MalformedUri("no scheme in '" + raw + "'");
    std::string scheme_s = lowercase(raw.substr(0, sep));
    ParsedUri u;
    if (scheme_s == "http")
        u.scheme = Scheme::http;
    else if (scheme_s == "https")
        u.scheme = Scheme::https;
    else
        throw MalformedUri("unsupported scheme '" + scheme_s + "'");

    std::size_t auth_start = sep + 3;
    std::size_t auth_end = raw.find_first_of("/?#", auth_start);
    std::string authority = raw.substr(
        auth_start, auth_end == std::string::npos ? std::string::npos
                                                  : auth_end - auth_start);
    // Userinfo is not expected in archival identifiers but is tolerated.
    auto at = authority.rfind('@');
    if (at != std::string::npos) authority = authority.substr(at + 1);
    auto colon = authority.find(':');
    std::string host = colon == std::string::npos ? authority
                                                  : authority.substr(0, colon);
    if (host.empty()) throw MalformedUri("empty host in '" + raw + "'");
    u.host = lowercase(host);
    if (colon != std::string::npos) {
        std::string port_s = authority.substr(colon + 1);
        if (port_s.empty() ||
            !std::all_of(port_s.begin(), port_s.end(), [](unsigned char c) {
                return std::isdigit(c);
            }))
            throw MalformedUri("bad port in '" + raw + "'");
        int port = std::stoi(port_s);
        u.port_was_present = true;
        if (port != default_port(u.scheme)) u.port = port;
    }

    std::string rest = auth_end == std::string::npos ? "" : raw.substr(auth_end);
    auto hash = rest.find('#');
    if (hash != std::string::npos) {
        u.fragment = rest.substr(hash + 1);
        rest = rest.substr(0, hash);
    }
    auto qmark = rest.find('?');
    if (qmark != std::string::npos) {
        u.query = rest.substr(qmark + 1);
        rest = rest.substr(0, qmark);
    }
    u.path = rest;
    return u;
}

ParsedUri canonicalize(const ParsedUri& u) {
    ParsedUri out = u;
    out.host = lowercase(out.host);
    out.port.reset();
    out.port_was_present = false;
    out.fragment.reset();
    if (out.path.empty()) out.path = "/";
    out.path = uppercase_percent(out.path);
    if (out.query) out.query = uppercase_percent(*out.query);
    if (out.host.rfind("www.", 0) == 0 && out.host.size() > 4)
        out.host = out.host.substr(4);
    return out;
}

SurtKey to_surt(const ParsedUri& u) {
    ParsedUri c = canonicalize(u);
    auto labels = split_labels(c.host);
    std::string key;
    for (auto it = labels.rbegin(); it != labels.rend(); ++it) {
        if (!key.empty()) key += ',';
        key += *it;
    }
    key += ')';
    key += c.path;
    if (c.query) {
        key += '?';
        key += *c.query;
    }
    return SurtKey{key};
}

Subdomain classify_subdomain(const ParsedUri& u) {
    std::string host = lowercase(u.host);
    std::string reg = registered_domain(host);
    if (host == reg) return Subdomain::none;
    if (host == "www." + reg) return Subdomain::www;
    return Subdomain::other;
}

UriClass classify(const ParsedUri& u) {
    return UriClass{u.scheme, classify_subdomain(u)};
}

}  // namespace mc
