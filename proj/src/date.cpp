#include "peakcast/date.hpp"

#include <charconv>
#include <cstdio>

#include "peakcast/errors.hpp"

namespace peakcast {

namespace {

int parse_field(std::string_view text, std::string_view whole)
{
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ParseError("invalid date '" + std::string(whole) + "'");
    return value;
}

}  // namespace

Date parse_date(std::string_view iso)
{
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
        throw ParseError("invalid date '" + std::string(iso) + "', expected YYYY-MM-DD");
    const int y = parse_field(iso.substr(0, 4), iso);
    const int m = parse_field(iso.substr(5, 2), iso);
    const int d = parse_field(iso.substr(8, 2), iso);
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw ParseError("invalid calendar date '" + std::string(iso) + "'");
    return Date{ymd};
}

std::string format_date(Date d)
{
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

int year_of(Date d) { return static_cast<int>(std::chrono::year_month_day{d}.year()); }

Date year_start(int year) { return Date{std::chrono::year{year} / std::chrono::January / 1}; }

int day_of_year(Date d) { return static_cast<int>(days_between(year_start(year_of(d)), d)) + 1; }

Date MonthDay::in_year(int year) const
{
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) throw ConfigError("invalid month-day " + format_month_day(*this) + " in " + std::to_string(year));
    return Date{ymd};
}

MonthDay parse_month_day(std::string_view text)
{
    if (text.size() != 5 || text[2] != '-')
        throw ParseError("invalid month-day '" + std::string(text) + "', expected MM-DD");
    MonthDay md{static_cast<unsigned>(parse_field(text.substr(0, 2), text)),
                static_cast<unsigned>(parse_field(text.substr(3, 2), text))};
    // 2000 is a leap year, so 02-29 is accepted here.
    const std::chrono::year_month_day probe{std::chrono::year{2000}, std::chrono::month{md.month},
                                            std::chrono::day{md.day}};
    if (!probe.ok()) throw ParseError("invalid month-day '" + std::string(text) + "'");
    return md;
}

std::string format_month_day(MonthDay md)
{
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02u-%02u", md.month, md.day);
    return buf;
}

}  // namespace peakcast
