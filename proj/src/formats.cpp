#include "mc/formats.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <json.hpp>

#include "mc/errors.hpp"

using nlohmann::json;

namespace mc {

namespace {

// ---------------------------------------------------------------- link format

struct RawLink {
    std::string target;
    std::vector<std::pair<std::string, std::string>> params;
    int line = 1;
    int offset = 0;
};

class LinkScanner {
public:
    explicit LinkScanner(const std::string& text) : text_(text) {}

    std::vector<RawLink> scan() {
        std::vector<RawLink> links;
        skip_ws();
        while (!eof()) {
            links.push_back(link_value());
            skip_ws();
            if (eof()) break;
            expect(',');
            skip_ws();
        }
        return links;
    }

private:
    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 0;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek())))
            advance();
    }

    void expect(char c) {
        if (eof() || peek() != c)
            throw LinkSyntaxError(std::string("expected '") + c + "'", line_, col_);
        advance();
    }

    RawLink link_value() {
        RawLink l;
        l.line = line_;
        l.offset = col_;
        expect('<');
        while (!eof() && peek() != '>') {
            l.target += peek();
            advance();
        }
        if (eof()) throw LinkSyntaxError("unterminated '<'", l.line, l.offset);
        advance();  // '>'
        skip_ws();
        while (!eof() && peek() == ';') {
            advance();
            skip_ws();
            l.params.push_back(param());
            skip_ws();
        }
        return l;
    }

    std::pair<std::string, std::string> param() {
        std::string name;
        while (!eof() && peek() != '=' && peek() != ';' && peek() != ',' &&
               !std::isspace(static_cast<unsigned char>(peek()))) {
            name += char(std::tolower(static_cast<unsigned char>(peek())));
            advance();
        }
        if (name.empty())
            throw LinkSyntaxError("empty parameter name", line_, col_);
        skip_ws();
        std::string value;
        if (!eof() && peek() == '=') {
            advance();
            skip_ws();
            if (!eof() && peek() == '"') {
                int qline = line_, qcol = col_;
                advance();
                while (!eof() && peek() != '"') {
                    if (peek() == '\\') {
                        advance();
                        if (eof())
                            throw LinkSyntaxError("dangling escape", line_, col_);
                    }
                    value += peek();
                    advance();
                }
                if (eof())
                    throw LinkSyntaxError("unterminated quote", qline, qcol);
                advance();  // closing '"'
            } else {
                while (!eof() && peek() != ';' && peek() != ',' &&
                       !std::isspace(static_cast<unsigned char>(peek()))) {
                    value += peek();
                    advance();
                }
            }
        }
        return {name, value};
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 0;
};

std::set<std::string> split_rel(const std::string& v) {
    std::set<std::string> out;
    std::istringstream in(v);
    std::string tok;
    while (in >> tok) out.insert(tok);
    return out;
}

std::optional<Instant> parse_datetime_attr(const std::string& v) {
    if (auto t = parse_rfc1123(v)) return t;
    return parse_stamp14(v);
}

TimeMapEntry entry_from(const RawLink& l) {
    TimeMapEntry e;
    e.uri_m = l.target;
    for (const auto& [k, v] : l.params) {
        if (k == "rel") {
            e.rel = split_rel(v);
        } else if (k == "datetime") {
            auto t = parse_datetime_attr(v);
            if (!t)
                throw LinkSyntaxError("unparseable datetime '" + v + "'",
                                      l.line, l.offset);
            e.datetime = t;
        } else if (k == "anchor") {
            e.anchor = v;
        } else if (k == "type") {
            e.media_type = v;
        }
        // Unknown parameters are dropped; unknown rel tokens are kept.
    }
    return e;
}

// Shared TimeMap assembly: sort mementos, dedupe, validate.
void finalize_timemap(TimeMap& tm) {
    std::stable_sort(tm.entries.begin(), tm.entries.end(),
                     [](const TimeMapEntry& a, const TimeMapEntry& b) {
                         if (!a.datetime) return false;  // undated sorts last
                         if (!b.datetime) return true;
                         return *a.datetime < *b.datetime;
                     });
    std::vector<TimeMapEntry> dedup;
    for (auto& e : tm.entries) {
        if (!dedup.empty() && dedup.back().uri_m == e.uri_m &&
            dedup.back().datetime == e.datetime) {
            tm.warnings.push_back("duplicate entry dropped: " + e.uri_m);
            continue;
        }
        dedup.push_back(std::move(e));
    }
    tm.entries = std::move(dedup);
}

}  // namespace

TimeMap parse_link_timemap(const std::string& text, ParseOptions opts) {
    auto links = LinkScanner(text).scan();
    TimeMap tm;
    bool have_original = false;
    for (const auto& l : links) {
        TimeMapEntry e = entry_from(l);
        if (e.rel.empty()) {
            if (opts.strict)
                throw LinkSyntaxError("link without rel", l.line, l.offset);
            tm.warnings.push_back("link without rel skipped: " + e.uri_m);
            continue;
        }
        if (e.rel.count("original")) {
            if (have_original) {
                if (opts.strict)
                    throw LinkSyntaxError("second rel=original", l.line, l.offset);
                tm.warnings.push_back("extra rel=original ignored: " + e.uri_m);
            } else {
                tm.original = e.uri_m;
                have_original = true;
            }
            continue;
        }
        if (e.rel.count("timegate")) {
            tm.timegates.push_back(e.uri_m);
            continue;
        }
        if (e.rel.count("timemap")) {
            tm.timemaps.push_back(e.uri_m);
            continue;
        }
        if (e.is_memento() && !e.datetime)
            throw InvalidMementoEntry("memento link without datetime",
                                      l.line, l.offset);
        tm.entries.push_back(std::move(e));
    }
    if (!have_original) throw MissingOriginal("no rel=\"original\" link");
    finalize_timemap(tm);
    return tm;
}

std::vector<TimeMapEntry> parse_link_value(const std::string& text) {
    auto links = LinkScanner(text).scan();
    std::vector<TimeMapEntry> out;
    out.reserve(links.size());
    for (const auto& l : links) out.push_back(entry_from(l));
    return out;
}

// ------------------------------------------------------------------------ CDX

std::string CdxRecord::to_line() const {
    std::string out = key.value;
    out += ' ';
    out += timestamp;
    out += ' ';
    out += original;
    out += ' ';
    out += mime;
    out += ' ';
    out += status ? std::to_string(*status) : "-";
    out += ' ';
    out += digest;
    out += ' ';
    out += std::to_string(length);
    return out;
}

std::vector<CdxRecord> parse_cdx(const std::string& text, ParseOptions opts,
                                 std::vector<std::string>* warnings) {
    std::vector<CdxRecord> records;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto fail = [&](const Error& err) {
        if (warnings) warnings->push_back(err.what());
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::vector<std::string> f;
        std::string tok;
        while (fields >> tok) f.push_back(tok);
        if (f.size() != 7) {
            CdxFieldCount err("expected 7 fields, got " +
                              std::to_string(f.size()), lineno);
            if (opts.strict) throw err;
            fail(err);
            continue;
        }
        if (!parse_stamp14(f[1])) {
            CdxBadTimestamp err("bad timestamp '" + f[1] + "'", lineno);
            if (opts.strict) throw err;
            fail(err);
            continue;
        }
        CdxRecord r;
        r.key = SurtKey{f[0]};
        r.timestamp = f[1];
        r.original = f[2];
        r.mime = f[3];
        if (f[4] != "-") {
            if (f[4].size() != 3 ||
                !std::all_of(f[4].begin(), f[4].end(), [](unsigned char c) {
                    return std::isdigit(c);
                })) {
                CdxFieldCount err("bad status '" + f[4] + "'", lineno);
                if (opts.strict) throw err;
                fail(err);
                continue;
            }
            r.status = std::stoi(f[4]);
        }
        r.digest = f[5];
        try {
            r.length = std::stoll(f[6]);
        } catch (const std::exception&) {
            CdxFieldCount err("bad length '" + f[6] + "'", lineno);
            if (opts.strict) throw err;
            fail(err);
            continue;
        }
        records.push_back(std::move(r));
    }
    return records;
}

// ----------------------------------------------------------------------- CDXJ

TimeMap parse_cdxj(const std::string& text, ParseOptions opts) {
    TimeMap tm;
    bool have_original = false;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "...") continue;
        if (line.rfind("@meta", 0) == 0) {
            json meta;
            try {
                meta = json::parse(line.substr(5));
            } catch (const json::exception& e) {
                CdxjMetaError err(std::string("bad @meta JSON: ") + e.what(),
                                  lineno);
                if (opts.strict) throw err;
                tm.warnings.push_back(err.what());
                continue;
            }
            if (meta.contains("original_uri")) {
                tm.original = meta["original_uri"].get<std::string>();
                have_original = true;
            }
            if (meta.contains("timegate_uri"))
                tm.timegates.push_back(meta["timegate_uri"].get<std::string>());
            if (meta.contains("timemap_uri")) {
                const auto& v = meta["timemap_uri"];
                if (v.is_string()) {
                    tm.timemaps.push_back(v.get<std::string>());
                } else if (v.is_object()) {
                    for (const auto& [k, uri] : v.items())
                        tm.timemaps.push_back(uri.get<std::string>());
                }
            }
            continue;
        }
        auto space = line.find(' ');
        if (space == std::string::npos) {
            CdxjEntryError err("entry line without JSON object", lineno);
            if (opts.strict) throw err;
            tm.warnings.push_back(err.what());
            continue;
        }
        std::string sort_key = line.substr(0, space);
        auto key_time = parse_stamp14(sort_key);
        json obj;
        try {
            obj = json::parse(line.substr(space + 1));
        } catch (const json::exception& e) {
            CdxjEntryError err(std::string("bad entry JSON: ") + e.what(),
                               lineno);
            if (opts.strict) throw err;
            tm.warnings.push_back(err.what());
            continue;
        }
        if (!key_time || !obj.contains("uri")) {
            CdxjEntryError err("entry missing sort key or uri", lineno);
            if (opts.strict) throw err;
            tm.warnings.push_back(err.what());
            continue;
        }
        TimeMapEntry e;
        e.uri_m = obj["uri"].get<std::string>();
        e.rel = obj.contains("rel") ? split_rel(obj["rel"].get<std::string>())
                                    : std::set<std::string>{"memento"};
        if (obj.contains("datetime")) {
            auto t = parse_datetime_attr(obj["datetime"].get<std::string>());
            if (!t) {
                CdxjEntryError err("unparseable datetime member", lineno);
                if (opts.strict) throw err;
                tm.warnings.push_back(err.what());
                continue;
            }
            // The datetime member is authoritative; the sort key is derived.
            e.datetime = t;
            if (*t != *key_time)
                tm.warnings.push_back("DatetimeSkew at line " +
                                      std::to_string(lineno) + ": sort key " +
                                      sort_key + " vs datetime member");
        } else {
            e.datetime = key_time;
            tm.warnings.push_back("entry without datetime member, sort key "
                                  "used (line " + std::to_string(lineno) + ")");
        }
        tm.entries.push_back(std::move(e));
    }
    if (!have_original) throw MissingOriginal("no @meta original_uri line");
    finalize_timemap(tm);
    return tm;
}

std::string serialize_cdxj(const TimeMap& tm) {
    std::string out;
    auto meta = [&](const std::string& key, const std::string& value) {
        json j;
        j[key] = value;
        out += "@meta " + j.dump() + "\n";
    };
    meta("original_uri", tm.original);
    for (const auto& tg : tm.timegates) meta("timegate_uri", tg);
    for (const auto& tmv : tm.timemaps) meta("timemap_uri", tmv);
    for (const auto& e : tm.entries) {
        json j;
        j["uri"] = e.uri_m;
        std::string rel;
        for (const auto& r : e.rel) {
            if (!rel.empty()) rel += ' ';
            rel += r;
        }
        j["rel"] = rel;
        if (e.datetime) j["datetime"] = format_rfc1123(*e.datetime);
        out += (e.datetime ? format_stamp14(*e.datetime)
                           : std::string("00000000000000")) +
               " " + j.dump() + "\n";
    }
    return out;
}

int count_rel_mementos(const TimeMap& tm) {
    int n = 0;
    for (const auto& e : tm.entries)
        if (e.is_memento()) ++n;
    return n;
}

}  // namespace mc
