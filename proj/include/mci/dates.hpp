#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace mci {

using Day = std::chrono::year_month_day;
using Month = std::chrono::year_month;

/// Parses "YYYY-MM-DD"; throws std::invalid_argument on anything else.
Day parse_day(std::string_view text);
/// Parses "YYYY-MM".
Month parse_month(std::string_view text);

std::string format_day(Day d);
std::string format_month(Month m);

inline Month month_of(Day d) { return Month{d.year(), d.month()}; }

/// Signed number of months from `from` to `to`.
int months_between(Month from, Month to);

inline Month next_month(Month m) { return m + std::chrono::months{1}; }

}  // namespace mci
