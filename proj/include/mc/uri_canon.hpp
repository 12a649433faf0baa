#pragma once

#include <optional>
#include <string>

namespace mc {

enum class Scheme { http, https };

enum class Subdomain { none, www, other };

const char* to_string(Scheme s);
const char* to_string(Subdomain s);

struct ParsedUri {
    Scheme scheme = Scheme::http;
    std::string host;                 // lowercase, non-empty
    std::optional<int> port;          // absent when not given or default
    bool port_was_present = false;    // true even when the default was written out
    std::string path;                 // may be empty before canonicalization
    std::optional<std::string> query;
    std::optional<std::string> fragment;

    bool operator==(const ParsedUri&) const = default;

    std::string to_string() const;
};

// SURT key of the form "tld,domain,...)/path".
struct SurtKey {
    std::string value;
    bool operator==(const SurtKey&) const = default;
};

// Throws MalformedUri for missing scheme, empty host, or a scheme other
// than http/https.
ParsedUri parse_uri(const std::string& raw);

// Lowercase host, default port removed, empty path -> "/", fragment dropped,
// exact leading "www" label removed, percent-encodings uppercased.
// Idempotent.
ParsedUri canonicalize(const ParsedUri& u);

SurtKey to_surt(const ParsedUri& u);

// Registered-domain heuristic: last two labels, with a small override list
// of known multi-label public suffixes. "www" matches only the exact label;
// "www2" and friends classify as `other`.
Subdomain classify_subdomain(const ParsedUri& u);

struct UriClass {
    Scheme scheme;
    Subdomain sub;
    bool operator==(const UriClass&) const = default;
};

UriClass classify(const ParsedUri& u);

}  // namespace mc
