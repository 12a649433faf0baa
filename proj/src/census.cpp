#include "mc/census.hpp"

#include <algorithm>
#include <cstdio>

#include "mc/errors.hpp"

namespace mc {

std::string Ratio::render() const {
    if (den == 0) return "inf";
    // Round half up at 3 decimal places, integer arithmetic only.
    long long milli = (num * 1000 * 2 + den) / (2 * den);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld.%03lld", milli / 1000, milli % 1000);
    return buf;
}

Ratio di_from_totals(long long m_tm, long long m_rc) {
    return Ratio{m_rc, m_tm - m_rc};
}

std::vector<TimeMapEntry> sorted_mementos(const TimeMap& tm) {
    std::vector<TimeMapEntry> out;
    for (const auto& e : tm.entries)
        if (e.is_memento() && e.datetime) out.push_back(e);
    std::sort(out.begin(), out.end(),
              [](const TimeMapEntry& a, const TimeMapEntry& b) {
                  if (*a.datetime != *b.datetime)
                      return *a.datetime < *b.datetime;
                  return a.uri_m < b.uri_m;  // stable tie-break for 0 s gaps
              });
    return out;
}

CensusCounts compute_counts(const TimeMap& tm, const OutcomeMap& outcomes) {
    CensusCounts c;
    c.m_tm = count_rel_mementos(tm);
    for (const auto& e : tm.entries) {
        if (!e.is_memento()) continue;
        auto it = outcomes.find(e.uri_m);
        if (it == outcomes.end())
            throw MissingOutcome("no outcome recorded for " + e.uri_m);
        const DerefOutcome& o = it->second;
        if (o.is_uncounted())
            ++c.uncounted;
        else if (o.is_redirect_class())
            ++c.tm_i;
        else
            ++c.tm_d;
    }
    return c;
}

std::vector<std::string> spec_violations(const TimeMap& tm,
                                         const OutcomeMap& outcomes) {
    std::vector<std::string> out;
    for (const auto& e : tm.entries) {
        if (!e.is_memento() || !e.datetime) continue;
        auto it = outcomes.find(e.uri_m);
        if (it == outcomes.end()) continue;
        const DerefOutcome& o = it->second;
        if (o.klass == DerefClass::DirectMemento && o.extracted_datetime &&
            *o.extracted_datetime != *e.datetime)
            out.push_back("SpecViolation: " + e.uri_m +
                          " datetime attribute " + format_rfc1123(*e.datetime) +
                          " != Memento-Datetime " +
                          format_rfc1123(*o.extracted_datetime));
    }
    return out;
}

std::map<int, CensusCounts> bucket_by_year(const TimeMap& tm,
                                           const OutcomeMap& outcomes) {
    std::map<int, TimeMap> per_year;
    for (const auto& e : tm.entries) {
        if (!e.is_memento() || !e.datetime) continue;
        TimeMap& bucket = per_year[utc_year(*e.datetime)];
        bucket.original = tm.original;
        bucket.entries.push_back(e);
    }
    std::map<int, CensusCounts> out;
    for (const auto& [year, bucket] : per_year)
        out[year] = compute_counts(bucket, outcomes);
    return out;
}

const char* const kGapBucketLabels[kGapBucketCount] = {
    "0s", "1s", "2s", "3s", "4s", "5s", "6s", "7s", "8s", "9s",
    ">9s<=1min", ">1min<=1h", ">1h<=1day", ">1day"};

int gap_bucket_index(long long gap_seconds) {
    if (gap_seconds <= 9) return int(gap_seconds);
    if (gap_seconds <= 60) return 10;
    if (gap_seconds <= 3600) return 11;
    if (gap_seconds <= 86400) return 12;
    return 13;
}

std::vector<GapBucket> gap_histogram(const TimeMap& tm) {
    std::vector<long long> counts(kGapBucketCount, 0);
    auto entries = sorted_mementos(tm);
    for (std::size_t i = 1; i < entries.size(); ++i) {
        long long gap =
            (*entries[i].datetime - *entries[i - 1].datetime).count();
        ++counts[gap_bucket_index(gap)];
    }
    std::vector<GapBucket> out;
    for (int i = 0; i < kGapBucketCount; ++i)
        out.push_back({kGapBucketLabels[i], counts[i]});
    return out;
}

std::map<int, double> avg_gap_by_year(const TimeMap& tm) {
    std::map<int, std::pair<long long, long long>> sums;  // year -> (sum, n)
    auto entries = sorted_mementos(tm);
    for (std::size_t i = 1; i < entries.size(); ++i) {
        long long gap =
            (*entries[i].datetime - *entries[i - 1].datetime).count();
        auto& [sum, n] = sums[utc_year(*entries[i - 1].datetime)];
        sum += gap;
        ++n;
    }
    std::map<int, double> out;
    for (const auto& [year, sn] : sums)
        out[year] = double(sn.first) / double(sn.second);
    return out;
}

const char* to_string(PatternCategory c) {
    switch (c) {
        case PatternCategory::inter_scheme: return "inter_scheme";
        case PatternCategory::slash_added: return "slash_added";
        case PatternCategory::subdomain_switch: return "subdomain_switch";
        default: return "other";
    }
}

RedirectPattern classify_pattern(const std::string& orig,
                                 const std::string& dest) {
    RedirectPattern p;
    std::optional<ParsedUri> uo, ud;
    try {
        uo = parse_uri(orig);
        p.scheme_orig = uo->scheme;
        p.sub_orig = classify_subdomain(*uo);
    } catch (const MalformedUri&) {
    }
    try {
        ud = parse_uri(dest);
        p.scheme_dest = ud->scheme;
        p.sub_dest = classify_subdomain(*ud);
    } catch (const MalformedUri&) {
    }
    if (!uo || !ud) return p;  // unknown margins, category other

    if (dest == orig + "/") {
        p.category = PatternCategory::slash_added;
    } else if (uo->scheme != ud->scheme) {
        p.category = PatternCategory::inter_scheme;
    } else if (uo->path == ud->path && uo->query == ud->query &&
               *p.sub_orig != *p.sub_dest) {
        p.category = PatternCategory::subdomain_switch;
    } else {
        p.category = PatternCategory::other;
    }
    return p;
}

long long RedirectMatrix::total() const {
    long long n = 0;
    for (const auto& [k, v] : cells) n += v;
    return n;
}

RedirectMatrix redirect_matrix(const OutcomeMap& outcomes) {
    RedirectMatrix m;
    for (const auto& [uri_m, o] : outcomes) {
        if (o.klass != DerefClass::ArchivedRedirect) continue;
        MatrixKey key;
        if (o.extracted_uri_r) {
            try {
                ParsedUri u = parse_uri(*o.extracted_uri_r);
                key.scheme_orig = u.scheme;
                key.sub_orig = classify_subdomain(u);
            } catch (const MalformedUri&) {
            }
        }
        if (o.final_uri_r) {
            try {
                ParsedUri u = parse_uri(*o.final_uri_r);
                key.scheme_dest = u.scheme;
                key.sub_dest = classify_subdomain(u);
            } catch (const MalformedUri&) {
            }
        }
        ++m.cells[key];
    }
    return m;
}

std::map<int, long long> close_pairs(const TimeMap& tm,
                                     std::chrono::seconds threshold) {
    std::map<int, long long> out;
    auto entries = sorted_mementos(tm);
    for (std::size_t i = 1; i < entries.size(); ++i) {
        auto gap = *entries[i].datetime - *entries[i - 1].datetime;
        if (gap <= threshold) ++out[utc_year(*entries[i - 1].datetime)];
    }
    return out;
}

std::optional<std::string> embedded_uri_r(const std::string& uri_m) {
    auto http_pos = uri_m.find("/http://");
    auto https_pos = uri_m.find("/https://");
    auto pos = std::min(http_pos, https_pos);
    if (pos == std::string::npos) return std::nullopt;
    return uri_m.substr(pos + 1);
}

SchemeDistribution scheme_distribution(const TimeMap& tm) {
    SchemeDistribution d;
    for (const auto& e : tm.entries) {
        if (!e.is_memento()) continue;
        auto r = embedded_uri_r(e.uri_m);
        if (!r)
            ++d.unknown;
        else if (r->rfind("https://", 0) == 0)
            ++d.https;
        else
            ++d.http;
    }
    return d;
}

std::map<std::pair<Scheme, Subdomain>, long long> uri_r_variants(
    const TimeMap& tm) {
    std::map<std::pair<Scheme, Subdomain>, long long> out;
    for (const auto& e : tm.entries) {
        if (!e.is_memento()) continue;
        auto r = embedded_uri_r(e.uri_m);
        if (!r) continue;
        try {
            ParsedUri u = parse_uri(*r);
            ++out[{u.scheme, classify_subdomain(u)}];
        } catch (const MalformedUri&) {
        }
    }
    return out;
}

std::vector<RedirectDelta> redirect_deltas(const TimeMap& tm,
                                           const OutcomeMap& outcomes) {
    std::vector<RedirectDelta> out;
    for (const auto& e : tm.entries) {
        if (!e.is_memento() || !e.datetime) continue;
        auto it = outcomes.find(e.uri_m);
        if (it == outcomes.end()) continue;
        const DerefOutcome& o = it->second;
        if (o.klass != DerefClass::ArchivedRedirect) continue;
        RedirectDelta d;
        d.year = utc_year(*e.datetime);
        auto scheme_of = [](const std::optional<std::string>& uri)
            -> std::optional<Scheme> {
            if (!uri) return std::nullopt;
            try {
                return parse_uri(*uri).scheme;
            } catch (const MalformedUri&) {
                return std::nullopt;
            }
        };
        d.scheme_orig = scheme_of(o.extracted_uri_r);
        d.scheme_dest = scheme_of(o.final_uri_r);
        Instant from = o.extracted_datetime.value_or(*e.datetime);
        if (o.final_datetime) {
            auto delta = (*o.final_datetime - from).count();
            d.delta_seconds = delta < 0 ? -delta : delta;
        }
        out.push_back(d);
    }
    return out;
}

}  // namespace mc
