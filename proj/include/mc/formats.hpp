#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mc/timeutil.hpp"
#include "mc/uri_canon.hpp"

namespace mc {

struct TimeMapEntry {
    std::string uri_m;               // opaque identifier
    std::set<std::string> rel;       // non-empty
    std::optional<Instant> datetime; // required when rel contains "memento"
    std::optional<std::string> anchor;
    std::optional<std::string> media_type;

    bool is_memento() const { return rel.count("memento") > 0; }
    bool operator==(const TimeMapEntry&) const = default;
};

struct TimeMap {
    std::string original;
    std::vector<std::string> timegates;
    std::vector<std::string> timemaps;
    std::vector<TimeMapEntry> entries;  // mementos sorted by datetime, stable
    std::vector<std::string> warnings;

    bool operator==(const TimeMap& o) const {
        return original == o.original && timegates == o.timegates &&
               timemaps == o.timemaps && entries == o.entries;
    }
};

struct CdxRecord {
    SurtKey key;
    std::string timestamp;          // 14-digit, calendar-valid
    std::string original;
    std::string mime;               // "unk" when unknown
    std::optional<int> status;      // absent when "-"
    std::string digest;
    long long length = 0;

    std::string to_line() const;
    bool operator==(const CdxRecord&) const = default;
};

struct ParseOptions {
    bool strict = false;  // permissive mode records warnings and skips
};

// Link-format TimeMap (comma-separated link-values, semicolon-separated
// attributes, angle-bracketed targets).
TimeMap parse_link_timemap(const std::string& text,
                           ParseOptions opts = {});

std::vector<CdxRecord> parse_cdx(const std::string& text,
                                 ParseOptions opts = {},
                                 std::vector<std::string>* warnings = nullptr);

// CDXJ: "@meta" header lines plus "<14-digit key> <JSON object>" entries.
// The entry datetime comes from the JSON "datetime" member; a sort key that
// disagrees is recorded as a DatetimeSkew warning.
TimeMap parse_cdxj(const std::string& text, ParseOptions opts = {});

std::string serialize_cdxj(const TimeMap& tm);

int count_rel_mementos(const TimeMap& tm);

// Parses one HTTP Link header value into entries (same grammar as a
// link-format TimeMap, without TimeMap-level validation).
std::vector<TimeMapEntry> parse_link_value(const std::string& text);

}  // namespace mc
