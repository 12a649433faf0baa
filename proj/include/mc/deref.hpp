#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mc/http.hpp"
#include "mc/timeutil.hpp"

namespace mc {

struct HttpTransaction {
    std::string request_uri;
    std::optional<Instant> sent_accept_datetime;
    int status = 0;
    std::optional<std::string> location;
    std::optional<Instant> memento_datetime;
    std::optional<std::string> link_original;
    bool has_body = false;
    std::size_t body_bytes = 0;
    Instant fetched_at{};
};

enum class DerefClass {
    DirectMemento,        // non-3XX, Memento-Datetime present
    ArchivedRedirect,     // 3XX with Memento-Datetime (archived transaction)
    ArchivedError,        // 4XX/5XX with Memento-Datetime
    ArchiveNavRedirect,   // 3XX without Memento-Datetime (archive navigation)
    TransientArchiveError,// archive-attributable error, no Memento-Datetime
    Unreachable,          // transport failure after retries
};

const char* to_string(DerefClass c);
std::optional<DerefClass> deref_class_from_string(const std::string& s);

struct DerefOutcome {
    std::string uri_m;
    DerefClass klass = DerefClass::Unreachable;
    std::vector<HttpTransaction> chain;
    std::optional<std::string> final_uri_m;
    std::optional<std::string> extracted_uri_r;
    std::optional<Instant> extracted_datetime;
    // Identity of the transaction the chain ultimately lands on.
    std::optional<std::string> final_uri_r;
    std::optional<Instant> final_datetime;
    std::vector<std::string> anomalies;

    bool is_redirect_class() const {
        return klass == DerefClass::ArchivedRedirect ||
               klass == DerefClass::ArchiveNavRedirect;
    }
    bool is_uncounted() const {
        return klass == DerefClass::TransientArchiveError ||
               klass == DerefClass::Unreachable;
    }

    std::string to_json() const;
    static DerefOutcome from_json(const std::string& line);
};

struct DerefConfig {
    int max_depth = 10;
    int retry_count = 3;
    std::chrono::milliseconds initial_backoff{2000};
    bool always_send_accept_datetime = false;
    // Instant to send on the 5XX-disambiguation retry (and in always-send
    // mode); typically the entry's TimeMap datetime.
    std::optional<Instant> accept_datetime;
    int timeout_ms = 25 * 60 * 1000;
};

// One GET without auto-redirect following, classified per DerefClass.
// 5XX responses lacking Memento-Datetime are retried with Accept-Datetime,
// then with exponential backoff. Transport failures become Unreachable
// outcomes, never exceptions.
DerefOutcome dereference(HttpFetcher& fetcher, const std::string& uri_m,
                         const DerefConfig& cfg = {});

// dereference() plus Location-chain following up to max_depth with loop
// detection. The class reflects the first transaction; RedirectLoop and
// DepthExceeded downgrade to ArchiveNavRedirect with an anomaly flag.
DerefOutcome resolve_chain(HttpFetcher& fetcher, const std::string& uri_m,
                           const DerefConfig& cfg = {});

// Header-derived identity. Throws IdentityUnavailable when either the
// Memento-Datetime header or the rel="original" Link value is absent.
std::pair<std::string, Instant> extract_identity(const HttpTransaction& t);

// Append-only line-oriented persistence (outcomes.jsonl in the store
// directory). get() returns the most recent record for a URI-M.
class OutcomeStore {
public:
    explicit OutcomeStore(const std::string& dir);

    void put(const DerefOutcome& outcome);
    std::optional<DerefOutcome> get(const std::string& uri_m) const;

    // Non-transient cached classes are reused on re-runs; transient and
    // unreachable outcomes are always re-fetched.
    bool needs_fetch(const std::string& uri_m) const;

    std::size_t size() const;
    std::vector<std::string> warnings() const { return warnings_; }

private:
    std::string path_;
    mutable std::mutex mu_;
    std::map<std::string, DerefOutcome> index_;
    std::vector<std::string> warnings_;
};

struct DerefProgress {
    int attempted = 0;
    int cached = 0;
    int transient = 0;
    int unreachable = 0;
};

// Dereferences every URI-M with a bounded worker pool, at most one in-flight
// request per host, politeness delay between same-host requests. Results are
// written to the store; completion order does not affect them.
DerefProgress dereference_all(HttpFetcher& fetcher,
                              const std::vector<std::string>& uri_ms,
                              OutcomeStore& store, const DerefConfig& cfg,
                              int concurrency = 4,
                              std::chrono::milliseconds politeness =
                                  std::chrono::milliseconds(0));

}  // namespace mc
