#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mc/census.hpp"
#include "mc/deref.hpp"
#include "mc/errors.hpp"
#include "mc/harvest.hpp"
#include "mc/report.hpp"

namespace fs = std::filesystem;
using namespace mc;

namespace {

struct GlobalOpts {
    std::string workdir = ".";
};

fs::path resolve(const GlobalOpts& g, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : fs::path(g.workdir) / path;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct HarvestArgs {
    std::string endpoint;
    std::string uri_r;
    std::string format = "cdxj";
    std::string out_dir = "harvest";
    std::string cdx_endpoint;
    long long timeout_ms = 25LL * 60 * 1000;
    long long politeness_ms = 1000;
};

struct DerefArgs {
    std::string in_dir = "harvest";
    std::string store_dir = "store";
    int concurrency = 4;
    int max_depth = 10;
    std::string archive_filter;
    int retry_count = 3;
    long long backoff_ms = 2000;
    long long politeness_ms = 1000;
    long long timeout_ms = 25LL * 60 * 1000;
    bool always_accept_datetime = false;
};

struct CensusArgs {
    std::string in_dir = "harvest";
    std::string store_dir = "store";
    std::string bundle_path = "bundle.json";
    bool per_year = true;
    std::string archive_filter;
    bool all_archives = false;
    long long threshold_s = 2;
    std::string host_label;
};

struct ReportArgs {
    std::string bundle_path = "bundle.json";
    std::string out_dir = "report";
    bool plot_data = false;
};

int run_harvest(const GlobalOpts& g, const HarvestArgs& a) {
    HarvestConfig cfg;
    cfg.response_timeout = std::chrono::milliseconds(a.timeout_ms);
    cfg.politeness_delay = std::chrono::milliseconds(a.politeness_ms);
    fs::path out = resolve(g, a.out_dir);
    fs::create_directories(out);
    cfg.cache_dir = (out / "raw").string();

    auto fetcher = make_socket_fetcher();
    RateLimiter limiter(cfg.politeness_delay);
    TimeMapFormat fmt =
        a.format == "link" ? TimeMapFormat::link : TimeMapFormat::cdxj;
    FetchMeta meta;
    TimeMap tm = fetch_timemap(*fetcher, a.endpoint, a.uri_r, fmt, cfg,
                               &limiter, &meta);
    // CDXJ normal form is the pipeline's interchange format.
    std::ofstream tmout(out / "timemap.cdxj", std::ios::binary);
    tmout << serialize_cdxj(tm);
    tmout.close();
    std::ofstream uriout(out / "uri_r.txt");
    uriout << a.uri_r << "\n";

    if (!a.cdx_endpoint.empty()) {
        auto records = fetch_cdx(*fetcher, a.cdx_endpoint, a.uri_r, cfg,
                                 &limiter);
        std::ofstream cdxout(out / "listing.cdx", std::ios::binary);
        for (const auto& r : records) cdxout << r.to_line() << "\n";
        std::cout << "cdx_records=" << records.size() << "\n";
    }
    std::cout << "mementos=" << count_rel_mementos(tm)
              << " status=" << meta.status << " bytes=" << meta.bytes << "\n";
    for (const auto& w : tm.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int run_deref(const GlobalOpts& g, const DerefArgs& a) {
    TimeMap tm = parse_cdxj(read_file(resolve(g, a.in_dir) / "timemap.cdxj"));
    ArchiveRegistry reg = ArchiveRegistry::builtin();

    std::vector<std::string> uris;
    for (const auto& e : tm.entries) {
        if (!e.is_memento()) continue;
        if (!a.archive_filter.empty() &&
            attribute_archive(e.uri_m, reg) != a.archive_filter)
            continue;
        uris.push_back(e.uri_m);
    }

    DerefConfig cfg;
    cfg.max_depth = a.max_depth;
    cfg.retry_count = a.retry_count;
    cfg.initial_backoff = std::chrono::milliseconds(a.backoff_ms);
    cfg.always_send_accept_datetime = a.always_accept_datetime;
    cfg.timeout_ms = int(a.timeout_ms);

    OutcomeStore store(resolve(g, a.store_dir).string());
    auto fetcher = make_socket_fetcher();
    DerefProgress p =
        dereference_all(*fetcher, uris, store, cfg, a.concurrency,
                        std::chrono::milliseconds(a.politeness_ms));
    std::cout << "attempted=" << p.attempted << " cached=" << p.cached
              << " transient=" << p.transient
              << " unreachable=" << p.unreachable << "\n";
    return p.unreachable > 0 ? 1 : 0;
}

int run_census(const GlobalOpts& g, const CensusArgs& a) {
    TimeMap tm = parse_cdxj(read_file(resolve(g, a.in_dir) / "timemap.cdxj"));
    ArchiveRegistry reg = ArchiveRegistry::builtin();
    OutcomeStore store(resolve(g, a.store_dir).string());

    if (!a.archive_filter.empty()) {
        TimeMap filtered = tm;
        filtered.entries.clear();
        for (const auto& e : tm.entries)
            if (attribute_archive(e.uri_m, reg) == a.archive_filter)
                filtered.entries.push_back(e);
        tm = std::move(filtered);
    }

    OutcomeMap outcomes;
    for (const auto& e : tm.entries) {
        if (!e.is_memento()) continue;
        auto o = store.get(e.uri_m);
        if (!o) throw MissingOutcome("no outcome recorded for " + e.uri_m);
        outcomes[e.uri_m] = std::move(*o);
    }

    ReportBundle b;
    b.counts = compute_counts(tm, outcomes);
    if (a.per_year) b.per_year = bucket_by_year(tm, outcomes);

    std::map<std::string, TimeMap> per_archive_tm;
    for (const auto& e : tm.entries) {
        if (!e.is_memento()) continue;
        std::string id = attribute_archive(e.uri_m, reg);
        ++b.archive_attribution[id];
        per_archive_tm[id].entries.push_back(e);
    }
    for (const auto& [id, sub] : per_archive_tm) {
        b.per_archive[id] = compute_counts(sub, outcomes);
        auto series = avg_gap_by_year(sub);
        if (!series.empty()) b.avg_gap_per_archive[id] = series;
    }

    // Gap metrics follow the per-archive scoping flag; the default scope is
    // internet_archive holdings.
    const TimeMap* scope = &tm;
    if (!a.all_archives) {
        auto it = per_archive_tm.find("internet_archive");
        static const TimeMap empty;
        scope = it != per_archive_tm.end() ? &it->second : &empty;
    }
    b.gaps = gap_histogram(*scope);
    b.close_pairs = close_pairs(*scope, std::chrono::seconds(a.threshold_s));
    b.avg_gap = avg_gap_by_year(tm);

    b.matrix = redirect_matrix(outcomes);
    b.scheme_dist = scheme_distribution(tm);
    b.variants = uri_r_variants(tm);
    b.deltas = redirect_deltas(tm, outcomes);

    b.anomalies = spec_violations(tm, outcomes);
    for (const auto& [uri_m, o] : outcomes)
        for (const auto& an : o.anomalies)
            b.anomalies.push_back(uri_m + ": " + an);

    SiteReport site;
    site.host = a.host_label.empty() ? host_of_uri(tm.original) : a.host_label;
    site.m_tm = b.counts.m_tm;
    site.tm_d = b.counts.tm_d;
    site.tm_i = b.counts.tm_i;
    site.uncounted = b.counts.uncounted;
    for (const auto& [uri_m, o] : outcomes) {
        if (o.is_uncounted() || o.chain.empty()) continue;
        int s = o.chain.front().status;
        if (s >= 200 && s < 300) ++site.n_2xx;
    }
    b.sites.push_back(std::move(site));

    b.save(resolve(g, a.bundle_path).string());
    std::cout << "m_tm=" << b.counts.m_tm << " tm_d=" << b.counts.tm_d
              << " tm_i=" << b.counts.tm_i
              << " uncounted=" << b.counts.uncounted
              << " di=" << b.counts.di().render() << "\n";
    return b.anomalies.empty() ? 0 : 1;
}

int run_report(const GlobalOpts& g, const ReportArgs& a) {
    ReportBundle b = ReportBundle::load(resolve(g, a.bundle_path).string());
    fs::path out = resolve(g, a.out_dir);
    emit_tables(b, out.string());
    if (a.plot_data) emit_plot_data(b, (out / "plot").string());
    std::cout << "report_dir=" << out.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Redirect-aware census over web-archive TimeMaps"};
    app.require_subcommand(1);

    GlobalOpts g;
    if (const char* env = std::getenv("MEMENTO_CENSUS_WORKDIR")) g.workdir = env;
    app.add_option("--workdir", g.workdir,
                   "Root for all relative paths (default: "
                   "$MEMENTO_CENSUS_WORKDIR or '.')");

    HarvestArgs ha;
    DerefArgs da;
    CensusArgs ca;
    ReportArgs ra;

    auto add_harvest_opts = [&](CLI::App* c) {
        c->add_option("--endpoint", ha.endpoint,
                      "TimeMap endpoint template with {format} and {uri_r}")
            ->required();
        c->add_option("--uri-r", ha.uri_r, "URI-R to query")->required();
        c->add_option("--format", ha.format, "TimeMap format: link or cdxj")
            ->check(CLI::IsMember({"link", "cdxj"}));
        c->add_option("--out", ha.out_dir, "Harvest output directory");
        c->add_option("--cdx-endpoint", ha.cdx_endpoint,
                      "Optional CDX query endpoint");
        c->add_option("--timeout-ms", ha.timeout_ms, "Response timeout");
        c->add_option("--politeness-ms", ha.politeness_ms,
                      "Per-host politeness delay");
    };
    auto add_deref_opts = [&](CLI::App* c, bool with_in) {
        if (with_in) c->add_option("--in", da.in_dir, "Harvest directory");
        c->add_option("--store", da.store_dir, "Outcome store directory");
        c->add_option("--concurrency", da.concurrency, "Worker pool size");
        c->add_option("--max-depth", da.max_depth, "Redirect chain limit");
        c->add_option("--archive", da.archive_filter,
                      "Only dereference URI-Ms attributed to this archive");
        c->add_option("--retry", da.retry_count, "Transient retry count");
        c->add_option("--backoff-ms", da.backoff_ms, "Initial retry backoff");
        c->add_option("--deref-politeness-ms", da.politeness_ms,
                      "Per-host politeness delay");
        c->add_option("--deref-timeout-ms", da.timeout_ms, "Request timeout");
        c->add_flag("--always-accept-datetime", da.always_accept_datetime,
                    "Send Accept-Datetime on every request");
    };
    auto add_census_opts = [&](CLI::App* c, bool with_dirs) {
        if (with_dirs) {
            c->add_option("--census-in", ca.in_dir, "Harvest directory");
            c->add_option("--census-store", ca.store_dir, "Store directory");
        } else {
            c->add_option("--in", ca.in_dir, "Harvest directory");
            c->add_option("--store", ca.store_dir, "Store directory");
        }
        c->add_option("--bundle", ca.bundle_path, "Bundle output path");
        c->add_flag("--per-year,!--no-per-year", ca.per_year,
                    "Emit per-year buckets");
        c->add_option("--census-archive", ca.archive_filter,
                      "Restrict the census to one archive");
        c->add_flag("--all-archives", ca.all_archives,
                    "Gap metrics over all archives, not just IA");
        c->add_option("--threshold", ca.threshold_s,
                      "Close-pair threshold in seconds");
        c->add_option("--host", ca.host_label, "Site label for sites.csv");
    };
    auto add_report_opts = [&](CLI::App* c, bool with_bundle) {
        if (with_bundle)
            c->add_option("--report-bundle", ra.bundle_path, "Bundle path");
        else
            c->add_option("--bundle", ra.bundle_path, "Bundle path");
        c->add_option("--report-out", ra.out_dir, "Report output directory");
        c->add_flag("--plot-data", ra.plot_data, "Also emit plot-data files");
    };

    CLI::App* harvest = app.add_subcommand("harvest", "Fetch and parse a TimeMap");
    add_harvest_opts(harvest);

    CLI::App* deref = app.add_subcommand("deref", "Dereference every URI-M");
    add_deref_opts(deref, true);

    CLI::App* census = app.add_subcommand("census", "Compute census metrics");
    add_census_opts(census, false);

    CLI::App* report = app.add_subcommand("report", "Emit CSV tables and plot data");
    add_report_opts(report, false);

    CLI::App* all = app.add_subcommand(
        "all", "harvest, deref, census, and report in sequence");
    add_harvest_opts(all);
    add_deref_opts(all, false);
    add_census_opts(all, true);
    add_report_opts(all, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(harvest)) return run_harvest(g, ha);
        if (app.got_subcommand(deref)) return run_deref(g, da);
        if (app.got_subcommand(census)) return run_census(g, ca);
        if (app.got_subcommand(report)) return run_report(g, ra);
        if (app.got_subcommand(all)) {
            da.in_dir = ha.out_dir;
            ca.in_dir = ha.out_dir;
            ca.store_dir = da.store_dir;
            ra.bundle_path = ca.bundle_path;
            int rc = run_harvest(g, ha);
            if (rc > 1) return rc;
            int rc2 = run_deref(g, da);
            if (rc2 > 1) return rc2;
            int rc3 = run_census(g, ca);
            if (rc3 > 1) return rc3;
            int rc4 = run_report(g, ra);
            return std::max({rc, rc2, rc3, rc4});
        }
    } catch (const MissingOutcome& e) {
        std::cerr << "error: MissingOutcome: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
