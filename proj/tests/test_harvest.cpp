#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include "fixtures.hpp"
#include "mc/errors.hpp"
#include "mc/harvest.hpp"
#include "mc/mock_archive.hpp"

using namespace mc;
namespace fs = std::filesystem;

TEST_CASE("endpoint templates expand both placeholders") {
    CHECK(expand_endpoint("http://aggr.test/timemap/{format}/{uri_r}",
                          "http://example.com/", "cdxj") ==
          "http://aggr.test/timemap/cdxj/http://example.com/");
    CHECK(expand_endpoint("http://aggr.test/plain", "http://x/", "link") ==
          "http://aggr.test/plain");
}

TEST_CASE("cache keys are stable and collision-shy") {
    auto k = request_cache_key("http://a/{uri_r}", "http://example.com/", "cdxj");
    CHECK(k == request_cache_key("http://a/{uri_r}", "http://example.com/",
                                 "cdxj"));
    CHECK(k.size() == 16);
    CHECK(k != request_cache_key("http://a/{uri_r}", "http://example.com/",
                                 "link"));
    CHECK(k != request_cache_key("http://b/{uri_r}", "http://example.com/",
                                 "cdxj"));
}

TEST_CASE("host extraction") {
    CHECK(host_of_uri("http://web.archive.org/web/2016/http://x/") ==
          "web.archive.org");
    CHECK(host_of_uri("http://127.0.0.1:8080/x") == "127.0.0.1");
    CHECK(host_of_uri("not a uri").empty());
}

TEST_CASE("builtin registry attributes the eight archives disjointly") {
    ArchiveRegistry reg = ArchiveRegistry::builtin();
    CHECK(reg.entries.size() == 8);
    CHECK_NOTHROW(reg.validate());
    CHECK(attribute_archive(
              "http://web.archive.org/web/2016/http://x/", reg) ==
          "internet_archive");
    CHECK(attribute_archive("http://www.webcitation.org/5ApDLK2Ad", reg) ==
          "webcitation");
    CHECK(attribute_archive("http://archive.is/abc12", reg) == "archive_is");
    CHECK(attribute_archive("http://unknown.example/m", reg) ==
          kUnknownArchive);
}

TEST_CASE("registry config file: parse and overlap rejection") {
    auto dir = fixtures::make_temp_dir("registry");
    {
        std::ofstream out(dir / "reg.conf");
        out << "# roster\n"
               "one = host1.test, host2.test ; cdx\n"
               "two = host3.test\n";
    }
    ArchiveRegistry reg = ArchiveRegistry::load((dir / "reg.conf").string());
    REQUIRE(reg.entries.size() == 2);
    CHECK(reg.entries[0].host_patterns ==
          std::vector<std::string>{"host1.test", "host2.test"});
    CHECK(reg.entries[0].has_cdx_endpoint);
    CHECK(!reg.entries[1].has_cdx_endpoint);

    {
        std::ofstream out(dir / "bad.conf");
        out << "one = archive.test\n"
               "two = sub.archive.test\n";  // substring overlap
    }
    CHECK_THROWS_AS(ArchiveRegistry::load((dir / "bad.conf").string()), Error);
    fs::remove_all(dir);
}

TEST_CASE("harvest config file: keys, defaults, validation") {
    auto dir = fixtures::make_temp_dir("config");
    {
        std::ofstream out(dir / "h.conf");
        out << "response_timeout_ms = 1500000\n"
               "header_timeout_ms = 1500000\n"
               "retry_count = 2\n"
               "politeness_delay_ms = 250\n"
               "cache_dir = /tmp/cache\n";
    }
    HarvestConfig cfg = HarvestConfig::load((dir / "h.conf").string());
    CHECK(cfg.response_timeout == std::chrono::milliseconds(1500000));
    CHECK(cfg.retry_count == 2);
    CHECK(cfg.politeness_delay == std::chrono::milliseconds(250));
    CHECK(cfg.cache_dir == "/tmp/cache");

    {
        std::ofstream out(dir / "bad.conf");
        out << "politeness_delay_ms = 0\n";
    }
    CHECK_THROWS_AS(HarvestConfig::load((dir / "bad.conf").string()), Error);
    {
        std::ofstream out(dir / "unknown.conf");
        out << "frobnication = yes\n";
    }
    CHECK_THROWS_AS(HarvestConfig::load((dir / "unknown.conf").string()),
                    Error);
    fs::remove_all(dir);
}

TEST_CASE("rate limiter spaces same-host request starts") {
    using clock = std::chrono::steady_clock;
    RateLimiter limiter(std::chrono::milliseconds(60));
    auto t0 = clock::now();
    limiter.acquire("a.test");
    limiter.acquire("b.test");  // different host, no wait
    auto mid = clock::now();
    limiter.acquire("a.test");  // must wait out the delay
    auto t1 = clock::now();
    CHECK(mid - t0 < std::chrono::milliseconds(50));
    CHECK(t1 - t0 >= std::chrono::milliseconds(60));
}

TEST_CASE("fetch_timemap parses both formats from the scenario archive") {
    MockArchive arch(build_scenario_fixture());
    HarvestConfig cfg;
    const std::string endpoint = "http://archive.test/timemap/{format}/{uri_r}";

    FetchMeta meta;
    TimeMap cdxj = fetch_timemap(arch, endpoint, kScenarioUriR,
                                 TimeMapFormat::cdxj, cfg, nullptr, &meta);
    CHECK(count_rel_mementos(cdxj) == 14);
    CHECK(meta.status == 200);
    CHECK(meta.bytes > 0);

    TimeMap link = fetch_timemap(arch, endpoint, kScenarioUriR,
                                 TimeMapFormat::link, cfg);
    CHECK(count_rel_mementos(link) == 14);
    CHECK(link.original == kScenarioUriR);
}

TEST_CASE("fetch_timemap raw cache short-circuits the network") {
    MockArchive arch(build_scenario_fixture());
    HarvestConfig cfg;
    auto dir = fixtures::make_temp_dir("rawcache");
    cfg.cache_dir = dir.string();
    const std::string endpoint = "http://archive.test/timemap/{format}/{uri_r}";

    fetch_timemap(arch, endpoint, kScenarioUriR, TimeMapFormat::cdxj, cfg);
    auto first = arch.request_log().size();
    CHECK(first == 1);
    TimeMap again = fetch_timemap(arch, endpoint, kScenarioUriR,
                                  TimeMapFormat::cdxj, cfg);
    CHECK(arch.request_log().size() == first);  // served from cache
    CHECK(count_rel_mementos(again) == 14);
    fs::remove_all(dir);
}

namespace {

struct GarbageFetcher : HttpFetcher {
    HttpResponse get(const std::string&, const RequestOptions&) override {
        HttpResponse r;
        r.status = 200;
        r.body = "not a cdxj body";
        return r;
    }
};

}  // namespace

TEST_CASE("fetch_timemap reports upstream and parse failures") {
    MockArchive arch(build_scenario_fixture());
    HarvestConfig cfg;
    CHECK_THROWS_AS(fetch_timemap(arch, "http://archive.test/timemap/{format}/"
                                        "{uri_r}",
                                  "http://absent.example/",
                                  TimeMapFormat::cdxj, cfg),
                    UpstreamError);

    GarbageFetcher bad;
    CHECK_THROWS_AS(fetch_timemap(bad, "http://archive.test/timemap/{format}/"
                                       "{uri_r}",
                                  "http://x/", TimeMapFormat::cdxj, cfg),
                    ParseFailure);
}

TEST_CASE("fetch_cdx handles plain and ?url= endpoints") {
    MockArchive arch(build_scenario_fixture());
    HarvestConfig cfg;
    auto records = fetch_cdx(arch, "http://archive.test/cdx", kScenarioUriR,
                             cfg);
    CHECK(records.size() == 9);  // alpha-host captures only
    for (const auto& r : records) CHECK(r.key.value == "example,alpha)/");
}

namespace {

// Pages 0..1 carry records, page 2 is past the end.
struct PagedCdxFetcher : HttpFetcher {
    int requests = 0;
    HttpResponse get(const std::string& uri, const RequestOptions&) override {
        ++requests;
        HttpResponse r;
        if (uri.find("page=0") != std::string::npos) {
            r.status = 200;
            r.body = "com,example)/ 20020120142510 http://example.com/ "
                     "text/html 200 DIGEST 100\n";
        } else if (uri.find("page=1") != std::string::npos) {
            r.status = 200;
            r.body = "com,example)/ 20020804094019 http://example.com/ "
                     "text/html 200 DIGEST 101\n";
        } else {
            r.status = 404;
        }
        return r;
    }
};

}  // namespace

TEST_CASE("fetch_cdx follows {page} pagination until the pages run out") {
    PagedCdxFetcher fetcher;
    HarvestConfig cfg;
    auto records =
        fetch_cdx(fetcher, "http://cdx.test/cdx?page={page}&url={uri_r}",
                  "http://example.com/", cfg);
    REQUIRE(records.size() == 2);
    CHECK(records[0].timestamp == "20020120142510");
    CHECK(records[1].timestamp == "20020804094019");
    CHECK(fetcher.requests == 3);  // two pages plus the terminating 404
}
