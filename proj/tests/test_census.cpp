#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "mc/census.hpp"
#include "mc/errors.hpp"

using namespace mc;

namespace {

TimeMapEntry entry(const std::string& uri_m, const std::string& stamp) {
    TimeMapEntry e;
    e.uri_m = uri_m;
    e.rel = {"memento"};
    e.datetime = parse_stamp14(stamp);
    return e;
}

DerefOutcome outcome(const std::string& uri_m, DerefClass klass) {
    DerefOutcome o;
    o.uri_m = uri_m;
    o.klass = klass;
    return o;
}

}  // namespace

TEST_CASE("ratio rendering: three decimals, half-up, inf") {
    CHECK(Ratio{11, 3}.render() == "3.667");
    CHECK(Ratio{87, 45}.render() == "1.933");
    CHECK(Ratio{4, 0}.render() == "inf");
    CHECK(Ratio{0, 5}.render() == "0.000");
    CHECK(Ratio{1, 8}.render() == "0.125");
    CHECK(Ratio{1, 2000}.render() == "0.001");  // exactly .0005 rounds up
    CHECK(Ratio{1, 3000}.render() == "0.000");
    CHECK(Ratio{5805, 133715}.render() == "0.043");
    CHECK(Ratio{2, 0}.is_infinite());
    CHECK(!Ratio{2, 1}.is_infinite());
}

TEST_CASE("di_from_totals reproduces printed per-year ratios") {
    CHECK(di_from_totals(4, 4).render() == "inf");        // all direct
    CHECK(di_from_totals(132, 87).render() == "1.933");
    CHECK(di_from_totals(176, 137).render() == "3.513");
    CHECK(di_from_totals(139520, 5805).render() == "0.043");
}

TEST_CASE("compute_counts partitions outcomes by class") {
    TimeMap tm;
    tm.original = "http://example.com/";
    tm.entries = {entry("http://a.test/m1", "20100101000000"),
                  entry("http://a.test/m2", "20110101000000"),
                  entry("http://a.test/m3", "20120101000000"),
                  entry("http://a.test/m4", "20130101000000"),
                  entry("http://a.test/m5", "20140101000000")};
    OutcomeMap outcomes;
    outcomes["http://a.test/m1"] =
        outcome("http://a.test/m1", DerefClass::DirectMemento);
    outcomes["http://a.test/m2"] =
        outcome("http://a.test/m2", DerefClass::ArchivedRedirect);
    outcomes["http://a.test/m3"] =
        outcome("http://a.test/m3", DerefClass::ArchiveNavRedirect);
    outcomes["http://a.test/m4"] =
        outcome("http://a.test/m4", DerefClass::ArchivedError);
    outcomes["http://a.test/m5"] =
        outcome("http://a.test/m5", DerefClass::TransientArchiveError);

    CensusCounts c = compute_counts(tm, outcomes);
    CHECK(c.m_tm == 5);
    CHECK(c.tm_d == 2);  // direct + archived error
    CHECK(c.tm_i == 2);  // both redirect flavors
    CHECK(c.uncounted == 1);
    CHECK(c.m_rc() == c.tm_d);
    CHECK(c.di() == Ratio{2, 2});
    CHECK(c.tm_d + c.tm_i + c.uncounted == c.m_tm);

    outcomes.erase("http://a.test/m3");
    CHECK_THROWS_AS(compute_counts(tm, outcomes), MissingOutcome);
}

TEST_CASE("bucket_by_year splits counts on the TimeMap datetime") {
    TimeMap tm;
    tm.original = "http://example.com/";
    tm.entries = {entry("http://a.test/m1", "20101231235959"),
                  entry("http://a.test/m2", "20110101000000"),
                  entry("http://a.test/m3", "20110601000000")};
    OutcomeMap outcomes;
    outcomes["http://a.test/m1"] =
        outcome("http://a.test/m1", DerefClass::DirectMemento);
    outcomes["http://a.test/m2"] =
        outcome("http://a.test/m2", DerefClass::ArchivedRedirect);
    outcomes["http://a.test/m3"] =
        outcome("http://a.test/m3", DerefClass::DirectMemento);

    auto per_year = bucket_by_year(tm, outcomes);
    REQUIRE(per_year.size() == 2);
    CHECK(per_year[2010].m_tm == 1);
    CHECK(per_year[2010].tm_d == 1);
    CHECK(per_year[2011].m_tm == 2);
    CHECK(per_year[2011].tm_i == 1);
}

TEST_CASE("gap bucket boundaries") {
    CHECK(gap_bucket_index(0) == 0);
    CHECK(gap_bucket_index(9) == 9);
    CHECK(gap_bucket_index(10) == 10);
    CHECK(gap_bucket_index(60) == 10);
    CHECK(gap_bucket_index(61) == 11);
    CHECK(gap_bucket_index(3600) == 11);
    CHECK(gap_bucket_index(3601) == 12);
    CHECK(gap_bucket_index(86400) == 12);
    CHECK(gap_bucket_index(86401) == 13);
}

TEST_CASE("gap histogram golden for the aggregated example.com map") {
    TimeMap tm = parse_link_timemap(fixtures::kLinkTimeMap);
    auto gaps = gap_histogram(tm);
    REQUIRE(int(gaps.size()) == kGapBucketCount);
    long long total = 0;
    for (const auto& g : gaps) total += g.count;
    CHECK(total == 4);  // n - 1
    std::map<std::string, long long> nonzero;
    for (const auto& g : gaps)
        if (g.count) nonzero[g.label] = g.count;
    CHECK(nonzero == std::map<std::string, long long>{
                         {">1day", 2}, {">1h<=1day", 1}, {">1min<=1h", 1}});
}

TEST_CASE("close pairs keyed by the earlier memento's year") {
    TimeMap tm;
    tm.original = "http://example.com/";
    tm.entries = {entry("http://a.test/m1", "20111231235959"),
                  entry("http://a.test/m2", "20120101000001"),  // gap 2s
                  entry("http://a.test/m3", "20120101000100"),
                  entry("http://a.test/m4", "20120101000101")};  // gap 1s
    auto pairs = close_pairs(tm);
    CHECK(pairs == std::map<int, long long>{{2011, 1}, {2012, 1}});
    auto strict0 = close_pairs(tm, std::chrono::seconds(0));
    CHECK(strict0.empty());
}

TEST_CASE("pattern goldens: the three canonicalization families") {
    auto slash = classify_pattern("http://www.google.com",
                                  "http://www.google.com/");
    CHECK(slash.category == PatternCategory::slash_added);
    CHECK(slash.scheme_orig == slash.scheme_dest);
    CHECK(slash.sub_orig == slash.sub_dest);

    auto scheme = classify_pattern("https://www.google.com/",
                                   "http://www.google.com/");
    CHECK(scheme.category == PatternCategory::inter_scheme);
    CHECK(scheme.scheme_orig == Scheme::https);
    CHECK(scheme.scheme_dest == Scheme::http);

    auto sub = classify_pattern("http://www.google.com/",
                                "http://google.com/");
    CHECK(sub.category == PatternCategory::subdomain_switch);
    CHECK(sub.sub_orig == Subdomain::www);
    CHECK(sub.sub_dest == Subdomain::none);

    auto other = classify_pattern("http://google.com/a",
                                  "http://google.com/b");
    CHECK(other.category == PatternCategory::other);

    // unparseable endpoints: unknown coordinates, category other
    auto unk = classify_pattern("not-a-uri", "http://google.com/");
    CHECK(unk.category == PatternCategory::other);
    CHECK(!unk.scheme_orig.has_value());
    CHECK(unk.scheme_dest == Scheme::http);
}

TEST_CASE("pattern order: the raw slash check precedes the others") {
    // scheme and subdomain both differ from the slashless original only in
    // the trailing slash -> still slash_added? No: dest must be orig + "/".
    auto p = classify_pattern("https://google.com", "https://google.com/");
    CHECK(p.category == PatternCategory::slash_added);
    // a slash added on an otherwise different URI is not slash_added
    auto q = classify_pattern("http://google.com", "https://google.com/");
    CHECK(q.category == PatternCategory::inter_scheme);
}

TEST_CASE("redirect matrix counts one cell per archived redirect") {
    OutcomeMap outcomes;
    auto add = [&](const std::string& uri_m, DerefClass k,
                   const std::string& orig, const std::string& dest) {
        DerefOutcome o = outcome(uri_m, k);
        if (!orig.empty()) o.extracted_uri_r = orig;
        if (!dest.empty()) o.final_uri_r = dest;
        outcomes[uri_m] = std::move(o);
    };
    add("http://a.test/r1", DerefClass::ArchivedRedirect,
        "http://www.google.com/", "http://google.com/");
    add("http://a.test/r2", DerefClass::ArchivedRedirect,
        "http://www.google.com/", "http://google.com/");
    add("http://a.test/r3", DerefClass::ArchivedRedirect,
        "https://google.com/", "");
    add("http://a.test/nav", DerefClass::ArchiveNavRedirect,
        "http://x.com/", "http://y.com/");  // not archived, not counted
    add("http://a.test/m", DerefClass::DirectMemento, "", "");

    RedirectMatrix m = redirect_matrix(outcomes);
    CHECK(m.total() == 3);
    MatrixKey www_to_none{Scheme::http, Subdomain::www, Scheme::http,
                          Subdomain::none};
    CHECK(m.cells.at(www_to_none) == 2);
    MatrixKey unknown_dest{Scheme::https, Subdomain::none, std::nullopt,
                           std::nullopt};
    CHECK(m.cells.at(unknown_dest) == 1);
}

TEST_CASE("embedded URI-R extraction and scheme distribution") {
    CHECK(embedded_uri_r("http://web.archive.org/web/2016/http://x.com/") ==
          "http://x.com/");
    CHECK(embedded_uri_r("http://web.archive.org/web/2016/https://x.com/") ==
          "https://x.com/");
    CHECK(!embedded_uri_r("http://www.webcitation.org/5ApDLK2Ad").has_value());

    TimeMap tm;
    tm.original = "http://x.com/";
    tm.entries = {
        entry("http://web.archive.org/web/20100101000000/http://x.com/",
              "20100101000000"),
        entry("http://web.archive.org/web/20110101000000/https://x.com/",
              "20110101000000"),
        entry("http://www.webcitation.org/5ApDLK2Ad", "20120101000000")};
    SchemeDistribution d = scheme_distribution(tm);
    CHECK(d.http == 1);
    CHECK(d.https == 1);
    CHECK(d.unknown == 1);
}

TEST_CASE("uri_r variant tallies by scheme and subdomain") {
    TimeMap tm;
    tm.original = "http://google.com/";
    tm.entries = {
        entry("http://a.test/web/1/http://www.google.com/", "20100101000000"),
        entry("http://a.test/web/2/http://www.google.com/", "20100102000000"),
        entry("http://a.test/web/3/http://google.com/", "20100103000000"),
        entry("http://a.test/web/4/https://mail.google.com/", "20100104000000"),
        entry("http://a.test/opaque", "20100105000000")};
    auto v = uri_r_variants(tm);
    CHECK(v[{Scheme::http, Subdomain::www}] == 2);
    CHECK(v[{Scheme::http, Subdomain::none}] == 1);
    CHECK(v[{Scheme::https, Subdomain::other}] == 1);
    long long total = 0;
    for (const auto& [k, n] : v) total += n;
    CHECK(total == 4);  // the opaque URI-M contributes nothing
}

TEST_CASE("average gap per year uses the earlier endpoint's year") {
    TimeMap tm;
    tm.original = "http://x.com/";
    tm.entries = {entry("http://a.test/m1", "20100101000000"),
                  entry("http://a.test/m2", "20100101000010"),
                  entry("http://a.test/m3", "20100101000040")};
    auto avg = avg_gap_by_year(tm);
    REQUIRE(avg.size() == 1);
    CHECK(avg[2010] == doctest::Approx(20.0));  // (10 + 30) / 2
}

TEST_CASE("sorted_mementos orders by datetime then URI-M") {
    TimeMap tm;
    tm.original = "http://x.com/";
    tm.entries = {entry("http://a.test/b", "20100101000000"),
                  entry("http://a.test/a", "20100101000000"),
                  entry("http://a.test/c", "20090101000000")};
    tm.entries.push_back([] {
        TimeMapEntry e;
        e.uri_m = "http://a.test/undated";
        e.rel = {"memento"};
        return e;
    }());
    auto sorted = sorted_mementos(tm);
    REQUIRE(sorted.size() == 3);  // undated dropped
    CHECK(sorted[0].uri_m == "http://a.test/c");
    CHECK(sorted[1].uri_m == "http://a.test/a");
    CHECK(sorted[2].uri_m == "http://a.test/b");
}

TEST_CASE("spec violations: direct mementos must honor their datetime") {
    TimeMap tm;
    tm.original = "http://x.com/";
    tm.entries = {entry("http://a.test/m1", "20100101000000")};
    OutcomeMap outcomes;
    DerefOutcome o = outcome("http://a.test/m1", DerefClass::DirectMemento);
    o.extracted_datetime = parse_stamp14("20100101000000");
    outcomes["http://a.test/m1"] = o;
    CHECK(spec_violations(tm, outcomes).empty());

    outcomes["http://a.test/m1"].extracted_datetime =
        parse_stamp14("20100101000005");
    auto v = spec_violations(tm, outcomes);
    REQUIRE(v.size() == 1);
    CHECK(v[0].rfind("SpecViolation:", 0) == 0);
}

TEST_CASE("redirect deltas measure identity-to-final drift") {
    TimeMap tm;
    tm.original = "http://x.com/";
    tm.entries = {entry("http://a.test/r", "20100101000000")};
    DerefOutcome o = outcome("http://a.test/r", DerefClass::ArchivedRedirect);
    o.extracted_uri_r = "http://x.com/";
    o.extracted_datetime = parse_stamp14("20100101000000");
    o.final_uri_r = "https://x.com/";
    o.final_datetime = parse_stamp14("20100101000002");
    OutcomeMap outcomes;
    outcomes["http://a.test/r"] = o;

    auto deltas = redirect_deltas(tm, outcomes);
    REQUIRE(deltas.size() == 1);
    CHECK(deltas[0].year == 2010);
    CHECK(deltas[0].scheme_orig == Scheme::http);
    CHECK(deltas[0].scheme_dest == Scheme::https);
    CHECK(deltas[0].delta_seconds == 2);
}

TEST_CASE("property: matrix total equals the archived-redirect count") {
    std::mt19937 rng(11);
    for (int round = 0; round < 100; ++round) {
        OutcomeMap outcomes;
        int redirects = 0;
        std::uniform_int_distribution<int> n_dist(0, 20), k_dist(0, 5);
        int n = n_dist(rng);
        for (int i = 0; i < n; ++i) {
            auto k = DerefClass(k_dist(rng));
            std::string u = "http://a.test/m" + std::to_string(i);
            DerefOutcome o = outcome(u, k);
            if (k == DerefClass::ArchivedRedirect) {
                ++redirects;
                o.extracted_uri_r = "http://x.com/";
                o.final_uri_r = "http://y.com/";
            }
            outcomes[u] = std::move(o);
        }
        CHECK(redirect_matrix(outcomes).total() == redirects);
    }
}
