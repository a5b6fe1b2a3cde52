#include "mci/dates.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace mci {

namespace {

int parse_fixed_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view what) {
    int value = 0;
    const char* first = text.data() + pos;
    const char* last = first + len;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw std::invalid_argument("bad " + std::string(what) + ": '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace

Day parse_day(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw std::invalid_argument("bad date: '" + std::string(text) + "'");
    }
    const int y = parse_fixed_int(text, 0, 4, "date");
    const int m = parse_fixed_int(text, 5, 2, "date");
    const int d = parse_fixed_int(text, 8, 2, "date");
    Day day{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
    if (!day.ok()) throw std::invalid_argument("bad date: '" + std::string(text) + "'");
    return day;
}

Month parse_month(std::string_view text) {
    if (text.size() != 7 || text[4] != '-') {
        throw std::invalid_argument("bad month: '" + std::string(text) + "'");
    }
    const int y = parse_fixed_int(text, 0, 4, "month");
    const int m = parse_fixed_int(text, 5, 2, "month");
    Month month{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)}};
    if (!month.ok()) throw std::invalid_argument("bad month: '" + std::string(text) + "'");
    return month;
}

std::string format_day(Day d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

std::string format_month(Month m) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u", static_cast<int>(m.year()),
                  static_cast<unsigned>(m.month()));
    return buf;
}

int months_between(Month from, Month to) {
    return (static_cast<int>(to.year()) - static_cast<int>(from.year())) * 12 +
           (static_cast<int>(static_cast<unsigned>(to.month())) -
            static_cast<int>(static_cast<unsigned>(from.month())));
}

}  // namespace mci
