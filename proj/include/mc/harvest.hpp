#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mc/formats.hpp"
#include "mc/http.hpp"

namespace mc {

struct ArchiveEntry {
    std::string archive_id;
    std::vector<std::string> host_patterns;  // substrings matched in URI-Ms
    bool has_cdx_endpoint = false;
    std::string timemap_template;  // "{format}" and "{uri_r}" placeholders
};

struct ArchiveRegistry {
    std::vector<ArchiveEntry> entries;

    // The eight archives the default roster ships with.
    static ArchiveRegistry builtin();
    static ArchiveRegistry load(const std::string& path);

    // Throws Error when two archives' patterns both match some entry
    // (patterns must be mutually disjoint).
    void validate() const;
};

inline constexpr const char* kUnknownArchive = "unknown";

// First pattern match wins; kUnknownArchive if none.
std::string attribute_archive(const std::string& uri_m,
                              const ArchiveRegistry& reg);

struct HarvestConfig {
    std::chrono::milliseconds response_timeout{25 * 60 * 1000};
    std::chrono::milliseconds header_timeout{25 * 60 * 1000};
    int retry_count = 3;
    std::chrono::milliseconds politeness_delay{1000};
    std::string cache_dir;  // empty disables the raw-response cache

    static HarvestConfig load(const std::string& path);
};

// Serializes request starts per host: two requests to one host begin at
// least `delay` apart.
class RateLimiter {
public:
    explicit RateLimiter(std::chrono::milliseconds delay) : delay_(delay) {}
    void acquire(const std::string& host);

private:
    std::chrono::milliseconds delay_;
    std::mutex mu_;
    std::map<std::string, std::chrono::steady_clock::time_point> last_start_;
};

enum class TimeMapFormat { link, cdxj };

struct FetchMeta {
    int status = 0;
    std::chrono::milliseconds elapsed{0};
    std::size_t bytes = 0;
};

// Expands the endpoint template, GETs, and parses via the formats module.
// Raw bodies are cached under cfg.cache_dir keyed by a hash of the request
// tuple. Throws NetworkTimeout, UpstreamError, ParseFailure.
TimeMap fetch_timemap(HttpFetcher& fetcher, const std::string& endpoint,
                      const std::string& uri_r, TimeMapFormat format,
                      const HarvestConfig& cfg, RateLimiter* limiter = nullptr,
                      FetchMeta* meta = nullptr);

std::vector<CdxRecord> fetch_cdx(HttpFetcher& fetcher,
                                 const std::string& endpoint,
                                 const std::string& uri_r,
                                 const HarvestConfig& cfg,
                                 RateLimiter* limiter = nullptr);

// Stable content hash for cache file names (FNV-1a, hex).
std::string request_cache_key(const std::string& endpoint,
                              const std::string& uri_r,
                              const std::string& format);

std::string expand_endpoint(const std::string& endpoint,
                            const std::string& uri_r,
                            const std::string& format);

std::string host_of_uri(const std::string& uri);

}  // namespace mc
