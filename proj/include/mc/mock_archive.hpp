#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "mc/http.hpp"
#include "mc/timeutil.hpp"

namespace mc {

struct TranscriptResponse {
    int status = 200;
    HttpHeaders headers;
    std::string body;
    // First n requests for this URI-M return a bare 503 (no Memento-Datetime),
    // then the recorded response.
    int transient_for_first_n = 0;
};

struct Transcript {
    // (uri_r, format) -> body, format is "link" or "cdxj"
    std::map<std::pair<std::string, std::string>, std::string> timemaps;
    std::map<std::string, std::string> cdx;
    std::map<std::string, TranscriptResponse> responses;
    // Optional per-URI-M override served when Accept-Datetime is present.
    std::map<std::string, TranscriptResponse> responses_with_accept_datetime;

    // Checks that every memento URI-M listed in a transcript TimeMap has a
    // response entry. Throws Error on violation.
    void validate() const;

    // Rewrites every origin appearing in response keys to `new_base`
    // (scheme://host[:port]), in keys, bodies, and Location headers.
    Transcript rebased(const std::string& new_base) const;

    static Transcript load(const std::string& path);
    void save(const std::string& path) const;
};

struct RequestLogEntry {
    std::string uri;
    std::string host;
    bool accept_datetime = false;
    std::chrono::steady_clock::time_point at;
};

// In-process transcript replay; doubles as an HttpFetcher so the whole
// pipeline can run without sockets.
class MockArchive : public HttpFetcher {
public:
    explicit MockArchive(Transcript t);

    HttpResponse get(const std::string& uri,
                     const RequestOptions& opts = {}) override;

    std::vector<RequestLogEntry> request_log() const;
    void reset_log();

    const Transcript& transcript() const { return transcript_; }

private:
    Transcript transcript_;
    mutable std::mutex mu_;
    std::map<std::string, int> request_ordinal_;
    std::vector<RequestLogEntry> log_;
};

// Local-socket mode: serves the transcript (rebased onto its own origin)
// over HTTP on an ephemeral port.
class SocketArchive {
public:
    explicit SocketArchive(const Transcript& t);
    ~SocketArchive();

    SocketArchive(const SocketArchive&) = delete;
    SocketArchive& operator=(const SocketArchive&) = delete;

    const std::string& base_url() const { return base_url_; }
    MockArchive& archive() { return *archive_; }

private:
    struct Impl;
    std::string base_url_;
    std::unique_ptr<MockArchive> archive_;
    std::unique_ptr<Impl> impl_;
};

// The two-TimeMap acquisition scenario: 14 URI-Ms across TimeMaps A and B,
// eight 200s, two 4XXs, one archived 504, three 3XXs. The aggregated
// TimeMap is registered under URI-R "http://alpha.example/".
Transcript build_scenario_fixture();

inline constexpr const char* kScenarioUriR = "http://alpha.example/";

}  // namespace mc
