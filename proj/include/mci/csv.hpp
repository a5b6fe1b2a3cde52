#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mci::csv {

/// Splits on commas. No quoting: none of the formats here carry embedded commas.
std::vector<std::string_view> split(std::string_view line);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row

    std::optional<std::size_t> column(std::string_view name) const;
};

/// Reads a headered CSV. Blank lines are skipped; ragged rows throw.
Table read(std::istream& in);

/// Strict double parse; throws std::invalid_argument for junk or non-finite values.
double parse_double(std::string_view text);

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

}  // namespace mci::csv
