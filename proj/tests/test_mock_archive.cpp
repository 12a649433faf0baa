#include <doctest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "mc/errors.hpp"
#include "mc/formats.hpp"
#include "mc/mock_archive.hpp"

using namespace mc;
namespace fs = std::filesystem;

namespace {

Transcript tiny_transcript() {
    Transcript t;
    TranscriptResponse ok;
    ok.status = 200;
    ok.headers.set("memento-datetime", "Sun, 20 Jan 2002 14:25:10 GMT");
    ok.headers.set("link", "<http://example.com/>; rel=\"original\"");
    ok.body = "<html>hit</html>";
    t.responses["http://archive.test/web/20020120142510/http://example.com/"] =
        ok;
    t.timemaps[{"http://example.com/", "link"}] =
        "<http://example.com/>; rel=\"original\",\n"
        "<http://archive.test/web/20020120142510/http://example.com/>; "
        "rel=\"memento\"; datetime=\"Sun, 20 Jan 2002 14:25:10 GMT\"";
    t.cdx["http://example.com/"] =
        "com,example)/ 20020120142510 http://example.com/ text/html 200 "
        "DIGEST 100\n";
    return t;
}

}  // namespace

TEST_CASE("transcript validation requires a response per listed URI-M") {
    Transcript t = tiny_transcript();
    CHECK_NOTHROW(t.validate());
    t.responses.clear();
    CHECK_THROWS_AS(t.validate(), Error);
}

TEST_CASE("mock archive serves recorded responses and routes") {
    MockArchive arch(tiny_transcript());

    auto hit = arch.get(
        "http://archive.test/web/20020120142510/http://example.com/");
    CHECK(hit.status == 200);
    CHECK(hit.headers.get("memento-datetime") ==
          "Sun, 20 Jan 2002 14:25:10 GMT");
    CHECK(hit.body == "<html>hit</html>");

    auto tm = arch.get("http://archive.test/timemap/link/http://example.com/");
    CHECK(tm.status == 200);
    CHECK(parse_link_timemap(tm.body).entries.size() == 1);

    auto cdx = arch.get("http://archive.test/cdx?url=http://example.com/");
    CHECK(cdx.status == 200);
    CHECK(parse_cdx(cdx.body).size() == 1);

    CHECK(arch.get("http://archive.test/nope").status == 404);
    CHECK(!arch.get("http://archive.test/nope")
               .headers.get("memento-datetime"));

    auto log = arch.request_log();
    CHECK(log.size() == 5);
    CHECK(log[0].host == "archive.test");
    arch.reset_log();
    CHECK(arch.request_log().empty());
}

TEST_CASE("transient responses resolve after n bare 503s") {
    Transcript t = tiny_transcript();
    const std::string uri =
        "http://archive.test/web/20020120142510/http://example.com/";
    t.responses[uri].transient_for_first_n = 2;
    MockArchive arch(t);
    CHECK(arch.get(uri).status == 503);
    CHECK(!arch.get(uri).headers.get("memento-datetime"));  // bare
    CHECK(arch.get(uri).status == 200);
}

TEST_CASE("accept-datetime variant overrides the plain response") {
    Transcript t = tiny_transcript();
    const std::string uri =
        "http://archive.test/web/20020120142510/http://example.com/";
    TranscriptResponse v;
    v.status = 404;
    v.headers.set("memento-datetime", "Sun, 20 Jan 2002 14:25:10 GMT");
    t.responses_with_accept_datetime[uri] = v;
    MockArchive arch(t);
    CHECK(arch.get(uri).status == 200);
    RequestOptions opts;
    opts.accept_datetime = "Sun, 20 Jan 2002 14:25:10 GMT";
    CHECK(arch.get(uri, opts).status == 404);
    auto log = arch.request_log();
    REQUIRE(log.size() == 2);
    CHECK(!log[0].accept_datetime);
    CHECK(log[1].accept_datetime);
}

TEST_CASE("rebasing rewrites keys, bodies, and location headers") {
    Transcript t = tiny_transcript();
    t.responses["http://archive.test/web/20020120142510/http://example.com/"]
        .headers.set("location",
                     "http://archive.test/web/20020120142512/"
                     "http://example.com/");
    Transcript r = t.rebased("http://127.0.0.1:9999");
    const std::string moved =
        "http://127.0.0.1:9999/web/20020120142510/http://example.com/";
    REQUIRE(r.responses.count(moved) == 1);
    CHECK(*r.responses.at(moved).headers.get("location") ==
          "http://127.0.0.1:9999/web/20020120142512/http://example.com/");
    CHECK(r.timemaps.at({"http://example.com/", "link"}).find("archive.test") ==
          std::string::npos);
    // non-archive origins are untouched
    CHECK(r.timemaps.at({"http://example.com/", "link"})
              .find("http://example.com/") != std::string::npos);
}

TEST_CASE("transcript save/load round trip") {
    auto dir = fixtures::make_temp_dir("transcript");
    Transcript t = tiny_transcript();
    TranscriptResponse v;
    v.status = 302;
    v.headers.set("location", "http://archive.test/elsewhere");
    t.responses_with_accept_datetime["http://archive.test/x"] = v;
    t.responses["http://archive.test/x"] = v;
    t.save((dir / "t.jsonl").string());

    Transcript back = Transcript::load((dir / "t.jsonl").string());
    CHECK(back.timemaps == t.timemaps);
    CHECK(back.cdx == t.cdx);
    CHECK(back.responses.size() == t.responses.size());
    CHECK(back.responses_with_accept_datetime.size() == 1);
    CHECK(back.responses.at("http://archive.test/x").status == 302);
    CHECK(*back.responses
               .at("http://archive.test/web/20020120142510/"
                   "http://example.com/")
               .headers.get("memento-datetime") ==
          "Sun, 20 Jan 2002 14:25:10 GMT");
    fs::remove_all(dir);
}

TEST_CASE("scenario fixture matches the published shape") {
    Transcript t = build_scenario_fixture();
    CHECK_NOTHROW(t.validate());

    TimeMap tm = parse_cdxj(t.timemaps.at({kScenarioUriR, "cdxj"}));
    CHECK(count_rel_mementos(tm) == 14);
    TimeMap link_tm = parse_link_timemap(t.timemaps.at({kScenarioUriR, "link"}));
    CHECK(count_rel_mementos(link_tm) == 14);
    CHECK(link_tm.original == kScenarioUriR);

    int n200 = 0, n3xx = 0, n4xx = 0, n5xx = 0, transients = 0;
    for (const auto& [uri, r] : t.responses) {
        if (r.status == 200) ++n200;
        if (r.status >= 300 && r.status < 400) ++n3xx;
        if (r.status >= 400 && r.status < 500) ++n4xx;
        if (r.status >= 500) ++n5xx;
        if (r.transient_for_first_n > 0) ++transients;
        CHECK(r.headers.get("memento-datetime").has_value());
    }
    CHECK(n200 == 8);
    CHECK(n3xx == 3);
    CHECK(n4xx == 2);
    CHECK(n5xx == 1);
    CHECK(transients == 1);
    CHECK(!t.cdx.empty());
}

TEST_CASE("socket archive serves the transcript over localhost") {
    SocketArchive server(tiny_transcript());
    auto fetcher = make_socket_fetcher();

    auto tm = fetcher->get(server.base_url() +
                           "/timemap/link/http://example.com/");
    CHECK(tm.status == 200);
    TimeMap parsed = parse_link_timemap(tm.body);
    REQUIRE(parsed.entries.size() == 1);
    // memento URI-Ms now live on the server's own origin
    CHECK(parsed.entries[0].uri_m.rfind(server.base_url(), 0) == 0);

    auto hit = fetcher->get(parsed.entries[0].uri_m);
    CHECK(hit.status == 200);
    CHECK(hit.headers.get("memento-datetime") ==
          "Sun, 20 Jan 2002 14:25:10 GMT");

    RequestOptions opts;
    opts.accept_datetime = "Sun, 20 Jan 2002 14:25:10 GMT";
    fetcher->get(parsed.entries[0].uri_m, opts);
    auto log = server.archive().request_log();
    CHECK(log.back().accept_datetime);
}
