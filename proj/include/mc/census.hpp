#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mc/deref.hpp"
#include "mc/formats.hpp"
#include "mc/uri_canon.hpp"

namespace mc {

// Extended nonnegative rational; infinite when the denominator is zero.
struct Ratio {
    long long num = 0;
    long long den = 0;  // den == 0 means infinity

    bool is_infinite() const { return den == 0; }
    // Rendered to 3 decimal places, "inf" for infinity.
    std::string render() const;
    bool operator==(const Ratio&) const = default;
};

struct CensusCounts {
    long long m_tm = 0;     // rel-token count
    long long tm_d = 0;     // non-3XX when dereferenced
    long long tm_i = 0;     // 3XX when dereferenced
    long long uncounted = 0;  // transient / unreachable, reported separately

    long long m_rc() const { return tm_d; }  // representative count
    Ratio di() const { return Ratio{tm_d, tm_i}; }
    bool operator==(const CensusCounts&) const = default;
};

Ratio di_from_totals(long long m_tm, long long m_rc);

using OutcomeMap = std::map<std::string, DerefOutcome>;

// Throws MissingOutcome when a memento entry has no outcome record.
CensusCounts compute_counts(const TimeMap& tm, const OutcomeMap& outcomes);

std::map<int, CensusCounts> bucket_by_year(const TimeMap& tm,
                                           const OutcomeMap& outcomes);

// DirectMemento outcomes whose Memento-Datetime disagrees with the entry's
// TimeMap datetime attribute, reported rather than silently accepted.
std::vector<std::string> spec_violations(const TimeMap& tm,
                                         const OutcomeMap& outcomes);

// Table-style gap buckets: 0s..9s, >9s<=1min, >1min<=1h, >1h<=1day, >1day.
inline constexpr int kGapBucketCount = 14;
extern const char* const kGapBucketLabels[kGapBucketCount];

struct GapBucket {
    std::string label;
    long long count = 0;
    bool operator==(const GapBucket&) const = default;
};

int gap_bucket_index(long long gap_seconds);
std::vector<GapBucket> gap_histogram(const TimeMap& tm);

std::map<int, double> avg_gap_by_year(const TimeMap& tm);

enum class PatternCategory { inter_scheme, slash_added, subdomain_switch, other };
const char* to_string(PatternCategory c);

struct RedirectPattern {
    std::optional<Scheme> scheme_orig;  // nullopt = unknown
    std::optional<Scheme> scheme_dest;
    std::optional<Subdomain> sub_orig;
    std::optional<Subdomain> sub_dest;
    PatternCategory category = PatternCategory::other;
    bool operator==(const RedirectPattern&) const = default;
};

// Checked in order: slash_added, inter_scheme, subdomain_switch, other.
RedirectPattern classify_pattern(const std::string& orig,
                                 const std::string& dest);

struct MatrixKey {
    std::optional<Scheme> scheme_orig;
    std::optional<Subdomain> sub_orig;
    std::optional<Scheme> scheme_dest;
    std::optional<Subdomain> sub_dest;
    auto operator<=>(const MatrixKey&) const = default;
};

struct RedirectMatrix {
    std::map<MatrixKey, long long> cells;

    long long total() const;
    bool operator==(const RedirectMatrix&) const = default;
};

// One increment per ArchivedRedirect outcome; unextractable endpoints land
// in the unknown margins.
RedirectMatrix redirect_matrix(const OutcomeMap& outcomes);

std::map<int, long long> close_pairs(const TimeMap& tm,
                                     std::chrono::seconds threshold =
                                         std::chrono::seconds(2));

struct SchemeDistribution {
    long long http = 0;
    long long https = 0;
    long long unknown = 0;
    bool operator==(const SchemeDistribution&) const = default;
};

// Scheme of the URI-R embedded in each URI-M, judged from the TimeMap alone;
// opaque identifiers count as unknown.
SchemeDistribution scheme_distribution(const TimeMap& tm);

std::map<std::pair<Scheme, Subdomain>, long long> uri_r_variants(
    const TimeMap& tm);

// Substring-extracted URI-R embedded in a URI-M, when present.
std::optional<std::string> embedded_uri_r(const std::string& uri_m);

// Plot-data support: per-redirect time deltas between the redirecting
// memento's identity datetime and the chain's final datetime.
struct RedirectDelta {
    int year = 0;
    std::optional<Scheme> scheme_orig;
    std::optional<Scheme> scheme_dest;
    long long delta_seconds = 0;
    bool operator==(const RedirectDelta&) const = default;
};

std::vector<RedirectDelta> redirect_deltas(const TimeMap& tm,
                                           const OutcomeMap& outcomes);

// Entries sorted by (datetime, uri_m); undated entries dropped.
std::vector<TimeMapEntry> sorted_mementos(const TimeMap& tm);

}  // namespace mc
