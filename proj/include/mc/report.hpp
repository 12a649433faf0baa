#pragma once

#include <map>
#include <string>
#include <vector>

#include "mc/census.hpp"

namespace mc {

struct SiteReport {
    std::string host;
    long long m_tm = 0;
    long long tm_d = 0;
    long long tm_i = 0;
    long long n_2xx = 0;
    long long uncounted = 0;
    bool operator==(const SiteReport&) const = default;
};

// Raw counts only; every percentage in the emitted tables re-derives from
// these.
struct ReportBundle {
    CensusCounts counts;
    std::map<int, CensusCounts> per_year;
    std::map<std::string, CensusCounts> per_archive;
    std::map<std::string, long long> archive_attribution;
    RedirectMatrix matrix;
    std::vector<GapBucket> gaps;
    std::map<int, long long> close_pairs;
    SchemeDistribution scheme_dist;
    std::map<std::pair<Scheme, Subdomain>, long long> variants;
    std::vector<SiteReport> sites;
    std::vector<RedirectDelta> deltas;
    std::map<int, double> avg_gap;
    std::map<std::string, std::map<int, double>> avg_gap_per_archive;
    std::vector<std::string> anomalies;

    bool operator==(const ReportBundle&) const = default;

    std::string to_json() const;
    static ReportBundle from_json(const std::string& text);
    static ReportBundle load(const std::string& path);
    void save(const std::string& path) const;
};

// One CSV per table analogue plus a JSON mirror of the whole bundle.
// Deterministic: identical bundles produce byte-identical files.
void emit_tables(const ReportBundle& bundle, const std::string& dir);

// Per (scheme pair, year) gap-occurrence series, per-year inter-scheme
// redirect counts, and percent-redirect-over-time series.
void emit_plot_data(const ReportBundle& bundle, const std::string& dir);

}  // namespace mc
