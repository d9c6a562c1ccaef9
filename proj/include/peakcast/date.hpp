#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace peakcast {

// Calendar day. All arithmetic is in whole days.
using Date = std::chrono::sys_days;

Date parse_date(std::string_view iso);   // YYYY-MM-DD, throws ParseError
std::string format_date(Date d);

inline long days_between(Date from, Date to) { return (to - from).count(); }
inline Date add_days(Date d, long n) { return d + std::chrono::days{n}; }

int year_of(Date d);
Date year_start(int year);
/// 1-based day of the year (Jan 1 -> 1).
int day_of_year(Date d);

/// Recurring month/day used for season windows ("03-01").
struct MonthDay {
    unsigned month = 1;
    unsigned day = 1;

    Date in_year(int year) const;
    friend bool operator==(const MonthDay&, const MonthDay&) = default;
};

MonthDay parse_month_day(std::string_view text);
std::string format_month_day(MonthDay md);

}  // namespace peakcast
