#include "mc/timeutil.hpp"

#include <array>
#include <cctype>
#include <cstdio>

namespace mc {

namespace {

const std::array<const char*, 12> kMonths = {
    "Jan", "Feb", "Mar", "Apr", "May", "Jun",
    "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

const std::array<const char*, 7> kDays = {
    "Thu", "Fri", "Sat", "Sun", "Mon", "Tue", "Wed"};  // epoch was a Thursday

bool valid_date(int y, int mo, int d, int h, int mi, int s) {
    if (y < 1000 || y > 9999 || mo < 1 || mo > 12 || d < 1) return false;
    if (h > 23 || mi > 59 || s > 60 || h < 0 || mi < 0 || s < 0) return false;
    static const int dim[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int max_d = dim[mo - 1];
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    if (mo == 2 && leap) max_d = 29;
    return d <= max_d;
}

Instant make_instant(int y, int mo, int d, int h, int mi, int s) {
    using namespace std::chrono;
    auto day = sys_days{year{y} / mo / d};
    return time_point_cast<seconds>(day) + hours{h} + minutes{mi} + seconds{s};
}

}  // namespace

std::optional<Instant> parse_rfc1123(const std::string& s) {
    // Ddd, DD Mmm YYYY hh:mm:ss GMT
    char dow[4] = {}, mon[4] = {}, tz[8] = {};
    int d = 0, y = 0, h = 0, mi = 0, sec = 0;
    if (std::sscanf(s.c_str(), "%3s, %d %3s %d %d:%d:%d %7s",
                    dow, &d, mon, &y, &h, &mi, &sec, tz) != 8)
        return std::nullopt;
    if (std::string(tz) != "GMT" && std::string(tz) != "UTC") return std::nullopt;
    int mo = 0;
    for (int i = 0; i < 12; ++i)
        if (std::string(mon) == kMonths[i]) { mo = i + 1; break; }
    if (mo == 0 || !valid_date(y, mo, d, h, mi, sec)) return std::nullopt;
    return make_instant(y, mo, d, h, mi, sec);
}

std::optional<Instant> parse_stamp14(const std::string& s) {
    if (s.size() != 14) return std::nullopt;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    auto num = [&](int pos, int len) {
        int v = 0;
        for (int i = 0; i < len; ++i) v = v * 10 + (s[pos + i] - '0');
        return v;
    };
    int y = num(0, 4), mo = num(4, 2), d = num(6, 2);
    int h = num(8, 2), mi = num(10, 2), sec = num(12, 2);
    if (!valid_date(y, mo, d, h, mi, sec)) return std::nullopt;
    return make_instant(y, mo, d, h, mi, sec);
}

std::string format_rfc1123(Instant t) {
    using namespace std::chrono;
    auto days = floor<std::chrono::days>(t);
    year_month_day ymd{days};
    hh_mm_ss hms{t - days};
    long dow = (days.time_since_epoch().count() % 7 + 7) % 7;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%s, %02u %s %04d %02ld:%02ld:%02ld GMT",
                  kDays[dow], unsigned(ymd.day()),
                  kMonths[unsigned(ymd.month()) - 1], int(ymd.year()),
                  long(hms.hours().count()), long(hms.minutes().count()),
                  long(hms.seconds().count()));
    return buf;
}

std::string format_stamp14(Instant t) {
    using namespace std::chrono;
    auto days = floor<std::chrono::days>(t);
    year_month_day ymd{days};
    hh_mm_ss hms{t - days};
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d%02u%02u%02ld%02ld%02ld",
                  int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()),
                  long(hms.hours().count()), long(hms.minutes().count()),
                  long(hms.seconds().count()));
    return buf;
}

int utc_year(Instant t) {
    using namespace std::chrono;
    year_month_day ymd{floor<std::chrono::days>(t)};
    return int(ymd.year());
}

}  // namespace mc
