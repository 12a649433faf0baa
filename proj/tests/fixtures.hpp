#pragma once

#include <chrono>
#include <filesystem>
#include <random>
#include <set>
#include <string>

#include "mc/formats.hpp"
#include "mc/timeutil.hpp"

// Shared golden inputs: an aggregated link-format TimeMap, the matching CDX
// listing, and a CDXJ TimeMap, all for example.com.

namespace fixtures {

inline std::filesystem::path make_temp_dir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    auto dir = std::filesystem::temp_directory_path() /
               (tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(dir);
    return dir;
}

// Random instant in [1996, 2017), whole seconds.
inline mc::Instant random_instant(std::mt19937& rng) {
    long long lo = 820454400;   // 1996-01-01T00:00:00Z
    long long hi = 1483228800;  // 2017-01-01T00:00:00Z
    std::uniform_int_distribution<long long> dist(lo, hi - 1);
    return mc::Instant{std::chrono::seconds(dist(rng))};
}

// Already in normal form: entries sorted by datetime, unique (uri_m, datetime),
// so a serialize/parse round trip must reproduce it exactly.
inline mc::TimeMap random_timemap(std::mt19937& rng) {
    mc::TimeMap tm;
    tm.original = "http://example.com/";
    std::uniform_int_distribution<int> coin(0, 1);
    if (coin(rng))
        tm.timegates.push_back("http://aggr.test/timegate/http://example.com/");
    if (coin(rng))
        tm.timemaps.push_back(
            "http://aggr.test/timemap/cdxj/http://example.com/");
    std::uniform_int_distribution<int> n_dist(0, 25);
    int n = n_dist(rng);
    std::set<long long> stamps;
    while (int(stamps.size()) < n)
        stamps.insert(random_instant(rng).time_since_epoch().count());
    int i = 0;
    for (long long s : stamps) {
        mc::TimeMapEntry e;
        e.datetime = mc::Instant{std::chrono::seconds(s)};
        e.uri_m = "http://web.archive.org/web/" +
                  mc::format_stamp14(*e.datetime) + "/http://example.com/";
        e.rel = {"memento"};
        if (i == 0 && coin(rng)) e.rel.insert("first");
        if (i == n - 1 && coin(rng)) e.rel.insert("last");
        tm.entries.push_back(std::move(e));
        ++i;
    }
    return tm;
}

inline const char* kLinkTimeMap = R"(<http://example.com>; rel="original",
<http://web.archive.org/web/20020120142510/http://example.com/>; rel="first memento"; datetime="Sun, 20 Jan 2002 14:25:10 GMT",
<http://web.archive.org/web/20020804094019/http://www.example.com/>; rel="memento"; datetime="Sun, 04 Aug 2002 09:40:19 GMT",
<http://web.archive.org/web/20160728014649/http://www.example.com/>; rel="memento"; datetime="Thu, 28 Jul 2016 01:46:49 GMT",
<http://web.archive.org/web/20160728114745/http://www.example.com>; rel="memento"; datetime="Thu, 28 Jul 2016 11:47:45 GMT",
<http://web.archive.org/web/20160728123024/http://example.com/>; rel="last memento"; datetime="Thu, 28 Jul 2016 12:30:24 GMT",
<http://localhost:1208/timemap/link/http://example.com>; anchor="http://example.com"; rel="timemap"; type="application/link-format",
<http://localhost:1208/timegate/http://example.com>; anchor="http://example.com"; rel="timegate"
)";

inline const char* kCdxListing =
    "com,example)/ 20020120142510 http://example.com:80/ text/html 200 HT2DYGA5UKZCPBSFVCV3JOBXGW2G5UUA 1792\n"
    "com,example)/ 20020804094019 http://www.example.com:80/ text/html 200 UY3I2DT2AMWAY6DECFCFYMT5ZOTFHUCH 457\n"
    "com,example)/ 20160728014649 http://www.example.com/ unk 302 3I42H3S6NNFQ2MSVX7XZKYAYSCX5QBYJ 339\n"
    "com,example)/ 20160728114745 http://www.example.com unk 302 3I42H3S6NNFQ2MSVX7XZKYAYSCX5QBYJ 340\n"
    "com,example)/ 20160728123024 http://example.com/ text/html 200 ASIFPQKKLDWATFDIO1OJJ3NSK34KLLMN 577\n";

inline const char* kCdxjTimeMap =
    "@meta {\"original_uri\": \"http://example.com\"}\n"
    "@meta {\"timegate_uri\": \"http://localhost:1208/timegate/http://example.com\"}\n"
    "@meta {\"timemap_uri\": {"
    "\"link_format\": \"http://localhost:1208/timemap/link/http://example.com\", "
    "\"json_format\": \"http://localhost:1208/timemap/json/http://example.com\", "
    "\"cdxj_format\": \"http://localhost:1208/timemap/cdxj/http://example.com\""
    "}}\n"
    "20090418233448 {\"uri\": \"http://web.archive.org/web/20090418233448/http://www.example.com/\", \"rel\": \"memento\", \"datetime\": \"Sat, 18 Apr 2009 23:34:48 GMT\"}\n"
    "20090421223547 {\"uri\": \"http://wayback.vefsafn.is/wayback/20090421223547/http://www.example.com/\", \"rel\": \"memento\", \"datetime\": \"Tue, 21 Apr 2009 22:35:47 GMT\"}\n"
    "20090421231335 {\"uri\": \"http://webarchive.loc.gov/all/20090421231335/http://www.example.com/\", \"rel\": \"memento\", \"datetime\": \"Tue, 21 Apr 2009 23:13:35 GMT\"}\n";

}  // namespace fixtures
