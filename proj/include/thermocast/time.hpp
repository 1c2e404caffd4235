#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "thermocast/common.hpp"

namespace thermocast {

using UtcTime = std::chrono::sys_seconds;

struct CivilTime {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;
    int hour = 0;
    int minute = 0;
};

inline bool is_valid_date(int year, unsigned month, unsigned day) {
    using namespace std::chrono;
    return year_month_day{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}}.ok();
}

inline UtcTime to_utc(const CivilTime& local, int utc_offset_hours) {
    using namespace std::chrono;
    const sys_days d = year_month_day{std::chrono::year{local.year}, std::chrono::month{local.month},
                                      std::chrono::day{local.day}};
    return UtcTime{d + hours{local.hour} + minutes{local.minute} - hours{utc_offset_hours}};
}

inline CivilTime to_civil(UtcTime t, int utc_offset_hours) {
    using namespace std::chrono;
    const auto local = t + hours{utc_offset_hours};
    const auto day_point = floor<days>(local);
    const year_month_day ymd{day_point};
    const hh_mm_ss<seconds> tod{local - day_point};
    return CivilTime{int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()),
                     int(tod.hours().count()), int(tod.minutes().count())};
}

inline std::string format_iso(UtcTime t) {
    const CivilTime c = to_civil(t, 0);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:00Z", c.year, c.month, c.day, c.hour, c.minute);
    return buf;
}

inline UtcTime parse_iso(std::string_view s) {
    const bool shape_ok = s.size() == 20 && s[4] == '-' && s[7] == '-' && s[10] == 'T' &&
                          s[13] == ':' && s[16] == ':' && s[19] == 'Z';
    if (!shape_ok) detail::fail("bad timestamp '", std::string(s), "', expected YYYY-MM-DDTHH:MM:SSZ");
    const auto field = [&](std::size_t pos, std::size_t len, int lo, int hi, const char* name) {
        const auto v = detail::parse_number<int>(s.substr(pos, len));
        if (!v || *v < lo || *v > hi) detail::fail("bad timestamp '", std::string(s), "': invalid ", name);
        return *v;
    };
    const int year = field(0, 4, 1, 9999, "year");
    const int month = field(5, 2, 1, 12, "month");
    const int day = field(8, 2, 1, 31, "day");
    const int hour = field(11, 2, 0, 23, "hour");
    const int minute = field(14, 2, 0, 59, "minute");
    const int second = field(17, 2, 0, 59, "second");
    if (!is_valid_date(year, unsigned(month), unsigned(day)))
        detail::fail("bad timestamp '", std::string(s), "': invalid calendar date");
    return to_utc({year, unsigned(month), unsigned(day), hour, minute}, 0) + std::chrono::seconds{second};
}

} // namespace thermocast
