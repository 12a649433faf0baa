#include "mc/harvest.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "mc/errors.hpp"

namespace fs = std::filesystem;

namespace mc {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

}  // namespace

ArchiveRegistry ArchiveRegistry::builtin() {
    ArchiveRegistry reg;
    auto add = [&](std::string id, std::vector<std::string> patterns,
                   bool cdx) {
        reg.entries.push_back({std::move(id), std::move(patterns), cdx, {}});
    };
    add("internet_archive", {"web.archive.org"}, true);
    add("archive_it", {"wayback.archive-it.org"}, false);
    add("webcitation", {"webcitation.org"}, false);
    add("stanford", {"swap.stanford.edu", "sul.stanford.edu"}, false);
    add("uk_national_archives", {"webarchive.nationalarchives.gov.uk"}, false);
    add("archive_is", {"archive.is", "archive.today"}, false);
    add("proni", {"webarchive.proni.gov.uk"}, false);
    add("uk_parliament", {"webarchive.parliament.uk"}, false);
    reg.validate();
    return reg;
}

// Registry config: lines of "archive_id = pattern1, pattern2 [; cdx]".
ArchiveRegistry ArchiveRegistry::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open registry " + path);
    ArchiveRegistry reg;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("registry line without '=': " + line);
        ArchiveEntry e;
        e.archive_id = trim(line.substr(0, eq));
        std::string rest = line.substr(eq + 1);
        auto semi = rest.find(';');
        if (semi != std::string::npos) {
            e.has_cdx_endpoint = trim(rest.substr(semi + 1)) == "cdx";
            rest = rest.substr(0, semi);
        }
        e.host_patterns = split_csv(rest);
        reg.entries.push_back(std::move(e));
    }
    reg.validate();
    return reg;
}

void ArchiveRegistry::validate() const {
    // Disjointness: no pattern may be a substring of another archive's
    // pattern, otherwise one URI-M could match two archives.
    for (std::size_t i = 0; i < entries.size(); ++i)
        for (std::size_t j = i + 1; j < entries.size(); ++j)
            for (const auto& a : entries[i].host_patterns)
                for (const auto& b : entries[j].host_patterns)
                    if (a.find(b) != std::string::npos ||
                        b.find(a) != std::string::npos)
                        throw Error("registry patterns overlap: '" + a +
                                    "' vs '" + b + "'");
}

std::string attribute_archive(const std::string& uri_m,
                              const ArchiveRegistry& reg) {
    for (const auto& e : reg.entries)
        for (const auto& p : e.host_patterns)
            if (uri_m.find(p) != std::string::npos) return e.archive_id;
    return kUnknownArchive;
}

HarvestConfig HarvestConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    HarvestConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config line without '=': " + line);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "response_timeout_ms")
            cfg.response_timeout = std::chrono::milliseconds(std::stoll(value));
        else if (key == "header_timeout_ms")
            cfg.header_timeout = std::chrono::milliseconds(std::stoll(value));
        else if (key == "retry_count")
            cfg.retry_count = std::stoi(value);
        else if (key == "politeness_delay_ms")
            cfg.politeness_delay = std::chrono::milliseconds(std::stoll(value));
        else if (key == "cache_dir")
            cfg.cache_dir = value;
        else
            throw Error("unknown config key: " + key);
    }
    if (cfg.response_timeout.count() <= 0 || cfg.header_timeout.count() <= 0 ||
        cfg.politeness_delay.count() <= 0)
        throw Error("config durations must be positive");
    return cfg;
}

void RateLimiter::acquire(const std::string& host) {
    using clock = std::chrono::steady_clock;
    clock::time_point wake;
    {
        std::lock_guard lock(mu_);
        auto now = clock::now();
        auto it = last_start_.find(host);
        wake = it == last_start_.end() ? now
                                       : std::max(now, it->second + delay_);
        last_start_[host] = wake;
    }
    std::this_thread::sleep_until(wake);
}

std::string request_cache_key(const std::string& endpoint,
                              const std::string& uri_r,
                              const std::string& format) {
    std::string tuple = endpoint + "|" + uri_r + "|" + format;
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : tuple) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

std::string expand_endpoint(const std::string& endpoint,
                            const std::string& uri_r,
                            const std::string& format) {
    std::string out = endpoint;
    auto replace = [&](const std::string& key, const std::string& value) {
        auto pos = out.find(key);
        while (pos != std::string::npos) {
            out.replace(pos, key.size(), value);
            pos = out.find(key, pos + value.size());
        }
    };
    replace("{uri_r}", uri_r);
    replace("{format}", format);
    return out;
}

std::string host_of_uri(const std::string& uri) {
    auto scheme_end = uri.find("://");
    if (scheme_end == std::string::npos) return {};
    auto end = uri.find_first_of("/:?#", scheme_end + 3);
    return uri.substr(scheme_end + 3,
                      end == std::string::npos ? std::string::npos
                                               : end - scheme_end - 3);
}

namespace {

struct RawFetch {
    std::string body;
    FetchMeta meta;
};

RawFetch fetch_raw(HttpFetcher& fetcher, const std::string& url,
                   const std::string& cache_name, const HarvestConfig& cfg,
                   RateLimiter* limiter, const char* accept) {
    if (!cfg.cache_dir.empty()) {
        fs::path cached = fs::path(cfg.cache_dir) / cache_name;
        if (fs::exists(cached)) {
            std::ifstream in(cached, std::ios::binary);
            std::ostringstream buf;
            buf << in.rdbuf();
            RawFetch out;
            out.body = buf.str();
            out.meta = {200, std::chrono::milliseconds(0), out.body.size()};
            return out;
        }
    }
    if (limiter) limiter->acquire(host_of_uri(url));
    RequestOptions opts;
    opts.timeout_ms = int(cfg.response_timeout.count());
    if (accept) opts.accept = accept;
    auto start = std::chrono::steady_clock::now();
    HttpResponse res = fetcher.get(url, opts);
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    if (res.status != 200)
        throw UpstreamError("fetch of " + url + " failed", res.status);
    if (!cfg.cache_dir.empty()) {
        fs::create_directories(cfg.cache_dir);
        std::ofstream out(fs::path(cfg.cache_dir) / cache_name,
                          std::ios::binary);
        out << res.body;
    }
    return {res.body, {res.status, elapsed, res.body.size()}};
}

}  // namespace

TimeMap fetch_timemap(HttpFetcher& fetcher, const std::string& endpoint,
                      const std::string& uri_r, TimeMapFormat format,
                      const HarvestConfig& cfg, RateLimiter* limiter,
                      FetchMeta* meta) {
    std::string fmt = format == TimeMapFormat::link ? "link" : "cdxj";
    std::string url = expand_endpoint(endpoint, uri_r, fmt);
    const char* accept = format == TimeMapFormat::link
                             ? "application/link-format"
                             : "application/cdxj+ors";
    RawFetch raw = fetch_raw(fetcher, url,
                             request_cache_key(endpoint, uri_r, fmt) + "." + fmt,
                             cfg, limiter, accept);
    if (meta) *meta = raw.meta;
    try {
        return format == TimeMapFormat::link ? parse_link_timemap(raw.body)
                                             : parse_cdxj(raw.body);
    } catch (const Error& e) {
        throw ParseFailure("TimeMap from " + url + ": " + e.what());
    }
}

std::vector<CdxRecord> fetch_cdx(HttpFetcher& fetcher,
                                 const std::string& endpoint,
                                 const std::string& uri_r,
                                 const HarvestConfig& cfg,
                                 RateLimiter* limiter) {
    std::string base = expand_endpoint(endpoint, uri_r, "cdx");
    if (base == endpoint) base = endpoint + "?url=" + uri_r;
    bool paged = base.find("{page}") != std::string::npos;
    std::vector<CdxRecord> records;
    for (int page = 0;; ++page) {
        std::string url = base;
        if (paged) {
            auto pos = url.find("{page}");
            url.replace(pos, 6, std::to_string(page));
        }
        RawFetch raw;
        try {
            raw = fetch_raw(fetcher, url,
                            request_cache_key(url, uri_r, "cdx") + ".cdx",
                            cfg, limiter, nullptr);
        } catch (const UpstreamError& e) {
            if (paged && page > 0 && e.status == 404) break;  // past last page
            throw;
        }
        if (raw.body.empty()) break;
        try {
            std::vector<std::string> warnings;
            auto parsed = parse_cdx(raw.body, {}, &warnings);
            records.insert(records.end(), parsed.begin(), parsed.end());
        } catch (const Error& e) {
            throw ParseFailure("CDX from " + url + ": " + e.what());
        }
        if (!paged) break;
    }
    return records;
}

}  // namespace mc
