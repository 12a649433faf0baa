#include "mc/mock_archive.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mc/errors.hpp"
#include "mc/formats.hpp"

using nlohmann::json;

namespace mc {

namespace {

std::string origin_of(const std::string& uri) {
    auto scheme_end = uri.find("://");
    if (scheme_end == std::string::npos) return {};
    auto path_start = uri.find('/', scheme_end + 3);
    return path_start == std::string::npos ? uri : uri.substr(0, path_start);
}

std::string host_of(const std::string& uri) {
    std::string origin = origin_of(uri);
    auto scheme_end = origin.find("://");
    if (scheme_end == std::string::npos) return origin;
    std::string hostport = origin.substr(scheme_end + 3);
    auto colon = hostport.find(':');
    return colon == std::string::npos ? hostport : hostport.substr(0, colon);
}

void replace_all(std::string& s, const std::string& from,
                 const std::string& to) {
    if (from.empty() || from == to) return;
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

json headers_to_json(const HttpHeaders& h) {
    json j = json::object();
    for (const auto& [k, v] : h.values) j[k] = v;
    return j;
}

HttpHeaders headers_from_json(const json& j) {
    HttpHeaders h;
    for (const auto& [k, v] : j.items()) h.set(k, v.get<std::string>());
    return h;
}

json response_to_json(const std::string& uri_m, const TranscriptResponse& r,
                      bool ad_variant) {
    json j;
    j["kind"] = "response";
    j["uri_m"] = uri_m;
    j["status"] = r.status;
    j["headers"] = headers_to_json(r.headers);
    j["body"] = r.body;
    if (r.transient_for_first_n)
        j["transient_for_first_n"] = r.transient_for_first_n;
    if (ad_variant) j["accept_datetime_variant"] = true;
    return j;
}

}  // namespace

void Transcript::validate() const {
    for (const auto& [key, body] : timemaps) {
        TimeMap tm = key.second == "cdxj" ? parse_cdxj(body)
                                          : parse_link_timemap(body);
        for (const auto& e : tm.entries) {
            if (e.is_memento() && !responses.count(e.uri_m))
                throw Error("transcript TimeMap lists URI-M without a "
                            "response entry: " + e.uri_m);
        }
    }
}

Transcript Transcript::rebased(const std::string& new_base) const {
    std::vector<std::string> origins;
    for (const auto& [uri_m, r] : responses) {
        std::string o = origin_of(uri_m);
        if (!o.empty() &&
            std::find(origins.begin(), origins.end(), o) == origins.end())
            origins.push_back(o);
    }
    auto fix = [&](std::string s) {
        for (const auto& o : origins) replace_all(s, o, new_base);
        return s;
    };
    Transcript out;
    for (const auto& [key, body] : timemaps) out.timemaps[key] = fix(body);
    for (const auto& [uri_r, body] : cdx) out.cdx[uri_r] = fix(body);
    auto fix_responses = [&](const std::map<std::string, TranscriptResponse>& in,
                             std::map<std::string, TranscriptResponse>& dst) {
        for (const auto& [uri_m, r] : in) {
            TranscriptResponse nr = r;
            if (auto loc = nr.headers.get("location"))
                nr.headers.set("location", fix(*loc));
            nr.body = fix(nr.body);
            dst[fix(uri_m)] = std::move(nr);
        }
    };
    fix_responses(responses, out.responses);
    fix_responses(responses_with_accept_datetime,
                  out.responses_with_accept_datetime);
    return out;
}

Transcript Transcript::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open transcript " + path);
    Transcript t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "timemap") {
            t.timemaps[{j.at("uri_r").get<std::string>(),
                        j.at("format").get<std::string>()}] =
                j.at("body").get<std::string>();
        } else if (kind == "cdx") {
            t.cdx[j.at("uri_r").get<std::string>()] =
                j.at("body").get<std::string>();
        } else if (kind == "response") {
            TranscriptResponse r;
            r.status = j.at("status").get<int>();
            r.headers = headers_from_json(j.at("headers"));
            r.body = j.value("body", std::string{});
            r.transient_for_first_n = j.value("transient_for_first_n", 0);
            auto& dst = j.value("accept_datetime_variant", false)
                            ? t.responses_with_accept_datetime
                            : t.responses;
            dst[j.at("uri_m").get<std::string>()] = std::move(r);
        } else {
            throw Error("unknown transcript record kind: " + kind);
        }
    }
    return t;
}

void Transcript::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write transcript " + path);
    for (const auto& [key, body] : timemaps) {
        json j;
        j["kind"] = "timemap";
        j["uri_r"] = key.first;
        j["format"] = key.second;
        j["body"] = body;
        out << j.dump() << "\n";
    }
    for (const auto& [uri_r, body] : cdx) {
        json j;
        j["kind"] = "cdx";
        j["uri_r"] = uri_r;
        j["body"] = body;
        out << j.dump() << "\n";
    }
    for (const auto& [uri_m, r] : responses)
        out << response_to_json(uri_m, r, false).dump() << "\n";
    for (const auto& [uri_m, r] : responses_with_accept_datetime)
        out << response_to_json(uri_m, r, true).dump() << "\n";
}

MockArchive::MockArchive(Transcript t) : transcript_(std::move(t)) {
    transcript_.validate();
}

HttpResponse MockArchive::get(const std::string& uri,
                              const RequestOptions& opts) {
    {
        std::lock_guard lock(mu_);
        log_.push_back({uri, host_of(uri), opts.accept_datetime.has_value(),
                        std::chrono::steady_clock::now()});
    }

    const TranscriptResponse* recorded = nullptr;
    if (opts.accept_datetime) {
        auto it = transcript_.responses_with_accept_datetime.find(uri);
        if (it != transcript_.responses_with_accept_datetime.end())
            recorded = &it->second;
    }
    if (!recorded) {
        auto it = transcript_.responses.find(uri);
        if (it != transcript_.responses.end()) recorded = &it->second;
    }
    if (recorded) {
        int ordinal;
        {
            std::lock_guard lock(mu_);
            ordinal = request_ordinal_[uri]++;
        }
        if (ordinal < recorded->transient_for_first_n) {
            HttpResponse r;
            r.status = 503;
            r.body = "intermittent archive error";
            return r;
        }
        HttpResponse r;
        r.status = recorded->status;
        r.headers = recorded->headers;
        r.body = recorded->body;
        return r;
    }

    // TimeMap and CDX query routes.
    std::string origin = origin_of(uri);
    std::string path = uri.substr(origin.size());
    if (path.rfind("/timemap/", 0) == 0) {
        std::string rest = path.substr(9);
        auto slash = rest.find('/');
        if (slash != std::string::npos) {
            std::string format = rest.substr(0, slash);
            std::string uri_r = rest.substr(slash + 1);
            auto it = transcript_.timemaps.find({uri_r, format});
            if (it != transcript_.timemaps.end()) {
                HttpResponse r;
                r.status = 200;
                r.headers.set("content-type", format == "cdxj"
                                                  ? "application/cdxj+ors"
                                                  : "application/link-format");
                r.body = it->second;
                return r;
            }
        }
    }
    if (path.rfind("/cdx", 0) == 0) {
        auto q = path.find("url=");
        if (q != std::string::npos) {
            std::string uri_r = path.substr(q + 4);
            auto it = transcript_.cdx.find(uri_r);
            if (it != transcript_.cdx.end()) {
                HttpResponse r;
                r.status = 200;
                r.headers.set("content-type", "text/plain");
                r.body = it->second;
                return r;
            }
        }
    }

    HttpResponse r;
    r.status = 404;
    r.body = "unknown route";
    return r;
}

std::vector<RequestLogEntry> MockArchive::request_log() const {
    std::lock_guard lock(mu_);
    return log_;
}

void MockArchive::reset_log() {
    std::lock_guard lock(mu_);
    log_.clear();
}

struct SocketArchive::Impl {
    httplib::Server server;
    std::thread thread;
};

SocketArchive::SocketArchive(const Transcript& t) : impl_(new Impl) {
    int port = impl_->server.bind_to_any_port("127.0.0.1");
    if (port <= 0) throw Error("mock archive could not bind a port");
    base_url_ = "http://127.0.0.1:" + std::to_string(port);
    archive_ = std::make_unique<MockArchive>(t.rebased(base_url_));

    impl_->server.Get(".*", [this](const httplib::Request& req,
                                   httplib::Response& res) {
        RequestOptions opts;
        if (req.has_header("Accept-Datetime"))
            opts.accept_datetime = req.get_header_value("Accept-Datetime");
        std::string target = req.target.empty() ? req.path : req.target;
        HttpResponse r = archive_->get(base_url_ + target, opts);
        res.status = r.status;
        std::string content_type = "text/plain";
        for (const auto& [k, v] : r.headers.values) {
            if (k == "content-type")
                content_type = v;
            else
                res.set_header(k, v);
        }
        res.set_content(r.body, content_type);
    });
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

SocketArchive::~SocketArchive() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

// ------------------------------------------------------------ scenario fixture

namespace {

struct ScenarioEntry {
    std::string stamp;
    std::string uri_r;        // URI-R embedded in the URI-M
    int status;
    std::string link_original;
    std::string location_stamp;  // stamp of the redirect target, if any
    std::string location_uri_r;
    int transient = 0;
};

}  // namespace

Transcript build_scenario_fixture() {
    const std::string archive = "http://archive.test";
    const std::string alpha = "http://alpha.example/";
    const std::string beta = "http://beta.example/";

    // TimeMap A (alpha.example, acquired) then TimeMap B (beta.example).
    std::vector<ScenarioEntry> entries = {
        {"20100101000000", alpha, 200, alpha, "", ""},
        {"20100601000000", alpha, 200, alpha, "", ""},
        // archived 302, subdomain switch www -> none
        {"20110101000000", "http://www.alpha.example/", 302,
         "http://www.alpha.example/", "20110101000002", alpha},
        {"20110101000002", alpha, 200, alpha, "", ""},
        // archived 302, slash added
        {"20110601000000", "http://alpha.example", 302, "http://alpha.example",
         "20110601000001", alpha},
        {"20110601000001", alpha, 200, alpha, "", ""},
        // archived 404: the URI-R was deleted during the acquisition
        {"20120101000000", alpha, 404, alpha, "", ""},
        // archived 504: server misconfigured in the transition
        {"20120601000000", alpha, 504, alpha, "", ""},
        // archived 301 into TimeMap B's URI-R at the point of acquisition
        {"20130101000000", alpha, 301, alpha, "20130102000000", beta},
        {"20130102000000", beta, 200, beta, "", ""},
        // archived 401 behind one intermittent bare 503
        {"20130601000000", beta, 401, beta, "", "", 1},
        {"20140101000000", beta, 200, beta, "", ""},
        {"20140601000000", beta, 200, beta, "", ""},
        {"20150101000000", beta, 200, beta, "", ""},
    };

    auto uri_m_for = [&](const std::string& stamp, const std::string& uri_r) {
        return archive + "/web/" + stamp + "/" + uri_r;
    };

    Transcript t;
    TimeMap tm;
    tm.original = alpha;
    tm.timegates.push_back(archive + "/timegate/" + alpha);
    tm.timemaps.push_back(archive + "/timemap/link/" + alpha);

    std::string link_body = "<" + alpha + ">; rel=\"original\"";
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        std::string uri_m = uri_m_for(e.stamp, e.uri_r);
        Instant dt = *parse_stamp14(e.stamp);

        TimeMapEntry tme;
        tme.uri_m = uri_m;
        tme.rel = {"memento"};
        if (i == 0) tme.rel.insert("first");
        if (i + 1 == entries.size()) tme.rel.insert("last");
        tme.datetime = dt;
        tm.entries.push_back(tme);

        std::string rel = i == 0 ? "first memento"
                          : i + 1 == entries.size() ? "last memento"
                                                    : "memento";
        link_body += ",\n<" + uri_m + ">; rel=\"" + rel + "\"; datetime=\"" +
                     format_rfc1123(dt) + "\"";

        TranscriptResponse r;
        r.status = e.status;
        r.headers.set("memento-datetime", format_rfc1123(dt));
        r.headers.set("link", "<" + e.link_original + ">; rel=\"original\"");
        if (!e.location_stamp.empty())
            r.headers.set("location",
                          uri_m_for(e.location_stamp, e.location_uri_r));
        if (e.status == 200) {
            r.headers.set("content-type", "text/html");
            r.body = "<html>capture " + e.stamp + "</html>";
        }
        r.transient_for_first_n = e.transient;
        t.responses[uri_m] = std::move(r);
    }

    t.timemaps[{alpha, "link"}] = link_body;
    t.timemaps[{alpha, "cdxj"}] = serialize_cdxj(tm);

    // Matching CDX listing for the alpha records held by this mock archive.
    std::string cdx_body;
    for (const auto& e : entries) {
        if (e.uri_r.find("beta") != std::string::npos) continue;
        CdxRecord rec;
        rec.key = SurtKey{"example,alpha)/"};
        rec.timestamp = e.stamp;
        rec.original = e.uri_r;
        rec.mime = e.status == 200 ? "text/html" : "unk";
        rec.status = e.status;
        rec.digest = "3I42H3S6NNFQ2MSVX7XZKYAYSCX5QBYJ";
        rec.length = 512;
        cdx_body += rec.to_line() + "\n";
    }
    t.cdx[alpha] = cdx_body;

    t.validate();
    return t;
}

}  // namespace mc
