#include "mc/deref.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include <json.hpp>

#include "mc/errors.hpp"
#include "mc/formats.hpp"
#include "mc/harvest.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace mc {

const char* to_string(DerefClass c) {
    switch (c) {
        case DerefClass::DirectMemento: return "DirectMemento";
        case DerefClass::ArchivedRedirect: return "ArchivedRedirect";
        case DerefClass::ArchivedError: return "ArchivedError";
        case DerefClass::ArchiveNavRedirect: return "ArchiveNavRedirect";
        case DerefClass::TransientArchiveError: return "TransientArchiveError";
        default: return "Unreachable";
    }
}

std::optional<DerefClass> deref_class_from_string(const std::string& s) {
    for (DerefClass c : {DerefClass::DirectMemento, DerefClass::ArchivedRedirect,
                         DerefClass::ArchivedError, DerefClass::ArchiveNavRedirect,
                         DerefClass::TransientArchiveError,
                         DerefClass::Unreachable})
        if (s == to_string(c)) return c;
    return std::nullopt;
}

namespace {

bool is_3xx(int s) { return s >= 300 && s < 400; }
bool is_5xx(int s) { return s >= 500 && s < 600; }

Instant now_utc() {
    return std::chrono::time_point_cast<std::chrono::seconds>(
        std::chrono::system_clock::now());
}

HttpTransaction transaction_from(const std::string& uri,
                                 const std::optional<Instant>& sent_ad,
                                 const HttpResponse& res) {
    HttpTransaction t;
    t.request_uri = uri;
    t.sent_accept_datetime = sent_ad;
    t.status = res.status;
    t.location = res.headers.get("location");
    if (auto md = res.headers.get("memento-datetime"))
        t.memento_datetime = parse_rfc1123(*md);
    if (auto link = res.headers.get("link")) {
        try {
            for (const auto& e : parse_link_value(*link))
                if (e.rel.count("original")) {
                    t.link_original = e.uri_m;
                    break;
                }
        } catch (const Error&) {
            // Malformed Link header: identity stays unavailable.
        }
    }
    t.has_body = !res.body.empty();
    t.body_bytes = res.body.size();
    t.fetched_at = now_utc();
    return t;
}

std::string resolve_location(const std::string& base,
                             const std::string& location) {
    if (location.rfind("http://", 0) == 0 ||
        location.rfind("https://", 0) == 0)
        return location;
    auto scheme_end = base.find("://");
    if (scheme_end == std::string::npos) return location;
    auto path_start = base.find('/', scheme_end + 3);
    std::string origin =
        path_start == std::string::npos ? base : base.substr(0, path_start);
    if (!location.empty() && location[0] == '/') return origin + location;
    // Relative reference: resolve against the base's directory.
    std::string dir = path_start == std::string::npos
                          ? origin + "/"
                          : base.substr(0, base.rfind('/') + 1);
    return dir + location;
}

// Issues the head transaction with the 5XX-disambiguation procedure:
// a bare 5XX gets one Accept-Datetime retry, then retry_count backoff
// retries. Transport failures propagate as NetworkTimeout.
HttpTransaction head_transaction(HttpFetcher& fetcher, const std::string& uri_m,
                                 const DerefConfig& cfg) {
    RequestOptions opts;
    opts.timeout_ms = cfg.timeout_ms;
    std::optional<Instant> sent_ad;
    if (cfg.always_send_accept_datetime && cfg.accept_datetime) {
        opts.accept_datetime = format_rfc1123(*cfg.accept_datetime);
        sent_ad = cfg.accept_datetime;
    }
    HttpTransaction t =
        transaction_from(uri_m, sent_ad, fetcher.get(uri_m, opts));
    if (!(is_5xx(t.status) && !t.memento_datetime)) return t;

    // Accept-Datetime retry first: a "soft" status may harden.
    RequestOptions ad_opts = opts;
    Instant ad = cfg.accept_datetime.value_or(now_utc());
    ad_opts.accept_datetime = format_rfc1123(ad);
    t = transaction_from(uri_m, ad, fetcher.get(uri_m, ad_opts));
    if (!(is_5xx(t.status) && !t.memento_datetime)) return t;

    auto backoff = cfg.initial_backoff;
    for (int i = 0; i < cfg.retry_count; ++i) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
        t = transaction_from(uri_m, ad, fetcher.get(uri_m, ad_opts));
        if (!(is_5xx(t.status) && !t.memento_datetime)) return t;
    }
    return t;
}

DerefClass classify_transaction(const HttpTransaction& t,
                                std::vector<std::string>& anomalies) {
    if (is_3xx(t.status)) {
        if (!t.location) anomalies.push_back("3xx-without-location");
        return t.memento_datetime ? DerefClass::ArchivedRedirect
                                  : DerefClass::ArchiveNavRedirect;
    }
    if (t.memento_datetime)
        return t.status >= 400 ? DerefClass::ArchivedError
                               : DerefClass::DirectMemento;
    if (t.status >= 400) return DerefClass::TransientArchiveError;
    // 2XX without Memento-Datetime: counted as direct per status semantics,
    // flagged because archival content is expected to carry the header.
    anomalies.push_back("memento-datetime-absent");
    return DerefClass::DirectMemento;
}

void fill_identity(DerefOutcome& out) {
    if (out.chain.empty()) return;
    const HttpTransaction& head = out.chain.front();
    if (head.link_original) out.extracted_uri_r = head.link_original;
    if (head.memento_datetime) out.extracted_datetime = head.memento_datetime;
    const HttpTransaction& last = out.chain.back();
    if (!is_3xx(last.status)) {
        out.final_uri_m = last.request_uri;
        if (last.link_original) out.final_uri_r = last.link_original;
        if (last.memento_datetime) out.final_datetime = last.memento_datetime;
    }
}

}  // namespace

DerefOutcome dereference(HttpFetcher& fetcher, const std::string& uri_m,
                         const DerefConfig& cfg) {
    DerefOutcome out;
    out.uri_m = uri_m;
    try {
        out.chain.push_back(head_transaction(fetcher, uri_m, cfg));
    } catch (const NetworkTimeout& e) {
        bool ok = false;
        auto backoff = cfg.initial_backoff;
        for (int i = 0; i < cfg.retry_count && !ok; ++i) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
            try {
                out.chain.push_back(head_transaction(fetcher, uri_m, cfg));
                ok = true;
            } catch (const NetworkTimeout&) {
            }
        }
        if (!ok) {
            out.klass = DerefClass::Unreachable;
            out.anomalies.push_back(std::string("transport: ") + e.what());
            return out;
        }
    }
    out.klass = classify_transaction(out.chain.front(), out.anomalies);
    fill_identity(out);
    return out;
}

DerefOutcome resolve_chain(HttpFetcher& fetcher, const std::string& uri_m,
                           const DerefConfig& cfg) {
    DerefOutcome out = dereference(fetcher, uri_m, cfg);
    if (out.klass == DerefClass::Unreachable) return out;

    std::set<std::string> visited{uri_m};
    std::string current = uri_m;
    while (is_3xx(out.chain.back().status)) {
        const HttpTransaction& hop = out.chain.back();
        if (!hop.location) break;  // anomaly already recorded
        std::string next = resolve_location(current, *hop.location);
        if (visited.count(next)) {
            out.anomalies.push_back("RedirectLoop");
            out.klass = DerefClass::ArchiveNavRedirect;
            break;
        }
        if (int(out.chain.size()) >= cfg.max_depth) {
            out.anomalies.push_back("DepthExceeded");
            out.klass = DerefClass::ArchiveNavRedirect;
            break;
        }
        visited.insert(next);
        current = next;
        RequestOptions opts;
        opts.timeout_ms = cfg.timeout_ms;
        try {
            out.chain.push_back(transaction_from(next, std::nullopt,
                                                 fetcher.get(next, opts)));
        } catch (const NetworkTimeout& e) {
            out.anomalies.push_back(std::string("chain-transport: ") + e.what());
            break;
        }
    }
    fill_identity(out);
    if (out.klass == DerefClass::DirectMemento && out.chain.size() == 1)
        out.final_uri_m = uri_m;
    return out;
}

std::pair<std::string, Instant> extract_identity(const HttpTransaction& t) {
    if (!t.memento_datetime)
        throw IdentityUnavailable("no Memento-Datetime header on " +
                                  t.request_uri);
    if (!t.link_original)
        throw IdentityUnavailable("no rel=\"original\" Link value on " +
                                  t.request_uri);
    return {*t.link_original, *t.memento_datetime};
}

// -------------------------------------------------------------- serialization

namespace {

json transaction_to_json(const HttpTransaction& t) {
    json j;
    j["request_uri"] = t.request_uri;
    if (t.sent_accept_datetime)
        j["sent_accept_datetime"] = format_rfc1123(*t.sent_accept_datetime);
    j["status"] = t.status;
    if (t.location) j["location"] = *t.location;
    if (t.memento_datetime)
        j["memento_datetime"] = format_rfc1123(*t.memento_datetime);
    if (t.link_original) j["link_original"] = *t.link_original;
    j["has_body"] = t.has_body;
    j["body_bytes"] = t.body_bytes;
    j["fetched_at"] = format_rfc1123(t.fetched_at);
    return j;
}

HttpTransaction transaction_from_json(const json& j) {
    HttpTransaction t;
    t.request_uri = j.at("request_uri").get<std::string>();
    if (j.contains("sent_accept_datetime"))
        t.sent_accept_datetime =
            parse_rfc1123(j["sent_accept_datetime"].get<std::string>());
    t.status = j.at("status").get<int>();
    if (j.contains("location")) t.location = j["location"].get<std::string>();
    if (j.contains("memento_datetime"))
        t.memento_datetime =
            parse_rfc1123(j["memento_datetime"].get<std::string>());
    if (j.contains("link_original"))
        t.link_original = j["link_original"].get<std::string>();
    t.has_body = j.value("has_body", false);
    t.body_bytes = j.value("body_bytes", std::size_t{0});
    if (j.contains("fetched_at"))
        if (auto at = parse_rfc1123(j["fetched_at"].get<std::string>()))
            t.fetched_at = *at;
    return t;
}

}  // namespace

std::string DerefOutcome::to_json() const {
    json j;
    j["uri_m"] = uri_m;
    j["class"] = mc::to_string(klass);
    j["chain"] = json::array();
    for (const auto& t : chain) j["chain"].push_back(transaction_to_json(t));
    if (final_uri_m) j["final_uri_m"] = *final_uri_m;
    if (extracted_uri_r) j["extracted_uri_r"] = *extracted_uri_r;
    if (extracted_datetime)
        j["extracted_datetime"] = format_rfc1123(*extracted_datetime);
    if (final_uri_r) j["final_uri_r"] = *final_uri_r;
    if (final_datetime) j["final_datetime"] = format_rfc1123(*final_datetime);
    if (!anomalies.empty()) j["anomalies"] = anomalies;
    return j.dump();
}

DerefOutcome DerefOutcome::from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw StoreCorrupt(std::string("bad outcome line: ") + e.what());
    }
    DerefOutcome o;
    try {
        o.uri_m = j.at("uri_m").get<std::string>();
        auto cls = deref_class_from_string(j.at("class").get<std::string>());
        if (!cls) throw StoreCorrupt("unknown class in outcome line");
        o.klass = *cls;
        for (const auto& tj : j.at("chain"))
            o.chain.push_back(transaction_from_json(tj));
        if (j.contains("final_uri_m"))
            o.final_uri_m = j["final_uri_m"].get<std::string>();
        if (j.contains("extracted_uri_r"))
            o.extracted_uri_r = j["extracted_uri_r"].get<std::string>();
        if (j.contains("extracted_datetime"))
            o.extracted_datetime =
                parse_rfc1123(j["extracted_datetime"].get<std::string>());
        if (j.contains("final_uri_r"))
            o.final_uri_r = j["final_uri_r"].get<std::string>();
        if (j.contains("final_datetime"))
            o.final_datetime =
                parse_rfc1123(j["final_datetime"].get<std::string>());
        if (j.contains("anomalies"))
            o.anomalies = j["anomalies"].get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw StoreCorrupt(std::string("bad outcome line: ") + e.what());
    }
    return o;
}

// ---------------------------------------------------------------------- store

OutcomeStore::OutcomeStore(const std::string& dir) {
    fs::create_directories(dir);
    path_ = (fs::path(dir) / "outcomes.jsonl").string();
    std::ifstream in(path_);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            DerefOutcome o = DerefOutcome::from_json(line);
            index_[o.uri_m] = std::move(o);
        } catch (const StoreCorrupt& e) {
            warnings_.push_back("line " + std::to_string(lineno) + " skipped: " +
                                e.what());
        }
    }
}

void OutcomeStore::put(const DerefOutcome& outcome) {
    std::lock_guard lock(mu_);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw IoError("cannot append to " + path_);
    out << outcome.to_json() << "\n";
    index_[outcome.uri_m] = outcome;
}

std::optional<DerefOutcome> OutcomeStore::get(const std::string& uri_m) const {
    std::lock_guard lock(mu_);
    auto it = index_.find(uri_m);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

bool OutcomeStore::needs_fetch(const std::string& uri_m) const {
    std::lock_guard lock(mu_);
    auto it = index_.find(uri_m);
    if (it == index_.end()) return true;
    return it->second.is_uncounted();
}

std::size_t OutcomeStore::size() const {
    std::lock_guard lock(mu_);
    return index_.size();
}

// --------------------------------------------------------------- worker pool

DerefProgress dereference_all(HttpFetcher& fetcher,
                              const std::vector<std::string>& uri_ms,
                              OutcomeStore& store, const DerefConfig& cfg,
                              int concurrency,
                              std::chrono::milliseconds politeness) {
    // One queue per host keeps at most one in-flight request per host.
    std::map<std::string, std::vector<std::string>> by_host;
    DerefProgress progress;
    for (const auto& u : uri_ms) {
        if (!store.needs_fetch(u)) {
            ++progress.cached;
            continue;
        }
        by_host[host_of_uri(u)].push_back(u);
    }

    std::vector<std::map<std::string, std::vector<std::string>>::iterator> hosts;
    for (auto it = by_host.begin(); it != by_host.end(); ++it)
        hosts.push_back(it);

    std::mutex mu;
    std::size_t next_host = 0;
    RateLimiter limiter(politeness);

    auto worker = [&] {
        for (;;) {
            std::size_t idx;
            {
                std::lock_guard lock(mu);
                if (next_host >= hosts.size()) return;
                idx = next_host++;
            }
            for (const auto& uri_m : hosts[idx]->second) {
                if (politeness.count() > 0) limiter.acquire(hosts[idx]->first);
                DerefOutcome o = resolve_chain(fetcher, uri_m, cfg);
                {
                    std::lock_guard lock(mu);
                    ++progress.attempted;
                    if (o.klass == DerefClass::TransientArchiveError)
                        ++progress.transient;
                    if (o.klass == DerefClass::Unreachable)
                        ++progress.unreachable;
                }
                store.put(o);
            }
        }
    };

    int n = std::max(1, std::min<int>(concurrency, int(hosts.size())));
    std::vector<std::thread> threads;
    for (int i = 0; i < n; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return progress;
}

}  // namespace mc
