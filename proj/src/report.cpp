#include "mc/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mc/errors.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace mc {

namespace {

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string pct(long long part, long long whole) {
    if (whole == 0) return "0.00";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * double(part) / double(whole));
    return buf;
}

std::string fmt3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string label(const std::optional<Scheme>& s) {
    return s ? to_string(*s) : "unknown";
}

std::string label(const std::optional<Subdomain>& s) {
    return s ? to_string(*s) : "unknown";
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
}

json counts_to_json(const CensusCounts& c) {
    return json{{"m_tm", c.m_tm},
                {"tm_d", c.tm_d},
                {"tm_i", c.tm_i},
                {"uncounted", c.uncounted}};
}

CensusCounts counts_from_json(const json& j) {
    CensusCounts c;
    c.m_tm = j.at("m_tm").get<long long>();
    c.tm_d = j.at("tm_d").get<long long>();
    c.tm_i = j.at("tm_i").get<long long>();
    c.uncounted = j.value("uncounted", 0LL);
    return c;
}

std::optional<Scheme> scheme_from_label(const std::string& s) {
    if (s == "http") return Scheme::http;
    if (s == "https") return Scheme::https;
    return std::nullopt;
}

std::optional<Subdomain> sub_from_label(const std::string& s) {
    if (s == "none") return Subdomain::none;
    if (s == "www") return Subdomain::www;
    if (s == "other") return Subdomain::other;
    return std::nullopt;
}

}  // namespace

std::string ReportBundle::to_json() const {
    json j;
    j["counts"] = counts_to_json(counts);
    j["per_year"] = json::object();
    for (const auto& [y, c] : per_year)
        j["per_year"][std::to_string(y)] = counts_to_json(c);
    j["per_archive"] = json::object();
    for (const auto& [a, c] : per_archive)
        j["per_archive"][a] = counts_to_json(c);
    j["archive_attribution"] = archive_attribution;
    j["matrix"] = json::array();
    for (const auto& [k, v] : matrix.cells)
        j["matrix"].push_back({{"scheme_orig", label(k.scheme_orig)},
                               {"sub_orig", label(k.sub_orig)},
                               {"scheme_dest", label(k.scheme_dest)},
                               {"sub_dest", label(k.sub_dest)},
                               {"count", v}});
    j["gaps"] = json::array();
    for (const auto& g : gaps)
        j["gaps"].push_back({{"bucket", g.label}, {"count", g.count}});
    j["close_pairs"] = json::object();
    for (const auto& [y, n] : close_pairs)
        j["close_pairs"][std::to_string(y)] = n;
    j["scheme_dist"] = {{"http", scheme_dist.http},
                        {"https", scheme_dist.https},
                        {"unknown", scheme_dist.unknown}};
    j["variants"] = json::array();
    for (const auto& [k, v] : variants)
        j["variants"].push_back({{"scheme", to_string(k.first)},
                                 {"subdomain", to_string(k.second)},
                                 {"count", v}});
    j["sites"] = json::array();
    for (const auto& s : sites)
        j["sites"].push_back({{"host", s.host},
                              {"m_tm", s.m_tm},
                              {"tm_d", s.tm_d},
                              {"tm_i", s.tm_i},
                              {"n_2xx", s.n_2xx},
                              {"uncounted", s.uncounted}});
    j["deltas"] = json::array();
    for (const auto& d : deltas)
        j["deltas"].push_back({{"year", d.year},
                               {"scheme_orig", label(d.scheme_orig)},
                               {"scheme_dest", label(d.scheme_dest)},
                               {"delta_seconds", d.delta_seconds}});
    j["avg_gap"] = json::object();
    for (const auto& [y, v] : avg_gap) j["avg_gap"][std::to_string(y)] = v;
    j["avg_gap_per_archive"] = json::object();
    for (const auto& [a, series] : avg_gap_per_archive) {
        json s = json::object();
        for (const auto& [y, v] : series) s[std::to_string(y)] = v;
        j["avg_gap_per_archive"][a] = s;
    }
    j["anomalies"] = anomalies;
    return j.dump(2);
}

ReportBundle ReportBundle::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseFailure(std::string("bad bundle JSON: ") + e.what());
    }
    ReportBundle b;
    b.counts = counts_from_json(j.at("counts"));
    for (const auto& [y, c] : j.at("per_year").items())
        b.per_year[std::stoi(y)] = counts_from_json(c);
    for (const auto& [a, c] : j.at("per_archive").items())
        b.per_archive[a] = counts_from_json(c);
    b.archive_attribution =
        j.value("archive_attribution", std::map<std::string, long long>{});
    for (const auto& cell : j.at("matrix")) {
        MatrixKey k;
        k.scheme_orig = scheme_from_label(cell.at("scheme_orig"));
        k.sub_orig = sub_from_label(cell.at("sub_orig"));
        k.scheme_dest = scheme_from_label(cell.at("scheme_dest"));
        k.sub_dest = sub_from_label(cell.at("sub_dest"));
        b.matrix.cells[k] = cell.at("count").get<long long>();
    }
    for (const auto& g : j.at("gaps"))
        b.gaps.push_back({g.at("bucket").get<std::string>(),
                          g.at("count").get<long long>()});
    for (const auto& [y, n] : j.at("close_pairs").items())
        b.close_pairs[std::stoi(y)] = n.get<long long>();
    b.scheme_dist.http = j.at("scheme_dist").at("http").get<long long>();
    b.scheme_dist.https = j.at("scheme_dist").at("https").get<long long>();
    b.scheme_dist.unknown = j.at("scheme_dist").at("unknown").get<long long>();
    for (const auto& v : j.at("variants")) {
        auto s = scheme_from_label(v.at("scheme"));
        auto d = sub_from_label(v.at("subdomain"));
        if (s && d) b.variants[{*s, *d}] = v.at("count").get<long long>();
    }
    for (const auto& s : j.at("sites")) {
        SiteReport r;
        r.host = s.at("host").get<std::string>();
        r.m_tm = s.at("m_tm").get<long long>();
        r.tm_d = s.at("tm_d").get<long long>();
        r.tm_i = s.at("tm_i").get<long long>();
        r.n_2xx = s.value("n_2xx", 0LL);
        r.uncounted = s.value("uncounted", 0LL);
        b.sites.push_back(std::move(r));
    }
    for (const auto& d : j.at("deltas")) {
        RedirectDelta r;
        r.year = d.at("year").get<int>();
        r.scheme_orig = scheme_from_label(d.at("scheme_orig"));
        r.scheme_dest = scheme_from_label(d.at("scheme_dest"));
        r.delta_seconds = d.at("delta_seconds").get<long long>();
        b.deltas.push_back(r);
    }
    for (const auto& [y, v] : j.at("avg_gap").items())
        b.avg_gap[std::stoi(y)] = v.get<double>();
    for (const auto& [a, series] : j.at("avg_gap_per_archive").items())
        for (const auto& [y, v] : series.items())
            b.avg_gap_per_archive[a][std::stoi(y)] = v.get<double>();
    b.anomalies = j.at("anomalies").get<std::vector<std::string>>();
    return b;
}

ReportBundle ReportBundle::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open bundle " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

void ReportBundle::save(const std::string& path) const {
    write_file(path, to_json() + "\n");
}

void emit_tables(const ReportBundle& bundle, const std::string& dir) {
    fs::create_directories(dir);
    const fs::path base(dir);

    {
        std::string csv = "m_tm,tm_d,tm_i,di\n";
        csv += std::to_string(bundle.counts.m_tm) + "," +
               std::to_string(bundle.counts.tm_d) + "," +
               std::to_string(bundle.counts.tm_i) + "," +
               bundle.counts.di().render() + "\n";
        write_file(base / "counts.csv", csv);
    }
    {
        std::string csv = "year,m_tm,m_rc,di\n";
        for (const auto& [year, c] : bundle.per_year)
            csv += std::to_string(year) + "," + std::to_string(c.m_tm) + "," +
                   std::to_string(c.m_rc()) + "," + c.di().render() + "\n";
        write_file(base / "per_year.csv", csv);
    }
    {
        std::string csv = "scheme_orig,sub_orig,scheme_dest,sub_dest,count\n";
        for (const auto& [k, v] : bundle.matrix.cells)
            csv += label(k.scheme_orig) + "," + label(k.sub_orig) + "," +
                   label(k.scheme_dest) + "," + label(k.sub_dest) + "," +
                   std::to_string(v) + "\n";
        write_file(base / "matrix.csv", csv);
    }
    {
        std::string csv = "bucket,count\n";
        for (const auto& g : bundle.gaps)
            csv += csv_quote(g.label) + "," + std::to_string(g.count) + "\n";
        write_file(base / "gaps.csv", csv);
    }
    {
        std::string csv = "year,count\n";
        for (const auto& [y, n] : bundle.close_pairs)
            csv += std::to_string(y) + "," + std::to_string(n) + "\n";
        write_file(base / "close_pairs.csv", csv);
    }
    {
        std::string csv = "scheme,count\n";
        csv += "http," + std::to_string(bundle.scheme_dist.http) + "\n";
        csv += "https," + std::to_string(bundle.scheme_dist.https) + "\n";
        csv += "unknown," + std::to_string(bundle.scheme_dist.unknown) + "\n";
        write_file(base / "scheme_dist.csv", csv);
    }
    {
        std::string csv = "scheme,subdomain,count\n";
        for (const auto& [k, v] : bundle.variants)
            csv += std::string(to_string(k.first)) + "," +
                   to_string(k.second) + "," + std::to_string(v) + "\n";
        write_file(base / "variants.csv", csv);
    }
    {
        std::string csv =
            "host,pct_3xx,pct_200,m_tm,di,tm_d,tm_i,n_2xx,uncounted\n";
        for (const auto& s : bundle.sites)
            csv += csv_quote(s.host) + "," + pct(s.tm_i, s.m_tm) + "," +
                   pct(s.n_2xx, s.m_tm) + "," + std::to_string(s.m_tm) + "," +
                   Ratio{s.tm_d, s.tm_i}.render() + "," +
                   std::to_string(s.tm_d) + "," + std::to_string(s.tm_i) +
                   "," + std::to_string(s.n_2xx) + "," +
                   std::to_string(s.uncounted) + "\n";
        write_file(base / "sites.csv", csv);
    }
    {
        std::string csv = "archive,count\n";
        for (const auto& [a, n] : bundle.archive_attribution)
            csv += csv_quote(a) + "," + std::to_string(n) + "\n";
        write_file(base / "attribution.csv", csv);
    }
    bundle.save((base / "bundle.json").string());
}

void emit_plot_data(const ReportBundle& bundle, const std::string& dir) {
    fs::create_directories(dir);
    const fs::path base(dir);

    // Per-year inter-scheme redirect counts.
    std::map<std::tuple<int, std::string, std::string>, long long> by_pair;
    // Per (scheme pair, year): gap-seconds occurrence counts for log-log
    // plotting.
    std::map<std::tuple<std::string, std::string, int>,
             std::map<long long, long long>>
        series;
    for (const auto& d : bundle.deltas) {
        std::string so = label(d.scheme_orig), sd = label(d.scheme_dest);
        ++by_pair[{d.year, so, sd}];
        ++series[{so, sd, d.year}][d.delta_seconds];
    }
    {
        std::string csv = "year,scheme_orig,scheme_dest,count\n";
        for (const auto& [k, v] : by_pair)
            csv += std::to_string(std::get<0>(k)) + "," + std::get<1>(k) +
                   "," + std::get<2>(k) + "," + std::to_string(v) + "\n";
        write_file(base / "interscheme.csv", csv);
    }
    for (const auto& [k, points] : series) {
        std::string csv = "gap_seconds,occurrence_count\n";
        for (const auto& [gap, n] : points)
            csv += std::to_string(gap) + "," + std::to_string(n) + "\n";
        write_file(base / ("delta_" + std::get<0>(k) + "_to_" +
                           std::get<1>(k) + "_" +
                           std::to_string(std::get<2>(k)) + ".csv"),
                   csv);
    }
    {
        std::string csv = "year,pct_redirect,m_tm,tm_i\n";
        for (const auto& [year, c] : bundle.per_year)
            csv += std::to_string(year) + "," + pct(c.tm_i, c.m_tm) + "," +
                   std::to_string(c.m_tm) + "," + std::to_string(c.tm_i) + "\n";
        write_file(base / "redirect_pct.csv", csv);
    }
    {
        std::string csv = "series,year,mean_gap_seconds\n";
        for (const auto& [y, v] : bundle.avg_gap)
            csv += "pooled," + std::to_string(y) + "," + fmt3(v) + "\n";
        for (const auto& [a, s] : bundle.avg_gap_per_archive)
            for (const auto& [y, v] : s)
                csv += csv_quote(a) + "," + std::to_string(y) + "," + fmt3(v) +
                       "\n";
        write_file(base / "avg_gap.csv", csv);
    }
}

}  // namespace mc
