#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mci/csv.hpp"
#include "mci/econometrics.hpp"
#include "mci/pipeline.hpp"

namespace mci {

namespace {

std::optional<csv::Table> load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    return csv::read(in);
}

std::optional<double> number(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    return csv::parse_double(cell);
}

std::string cell(const std::string& raw, double scale, int precision) {
    const auto v = number(raw);
    if (!v) return "---";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, *v * scale);
    return buf;
}

std::string stars(const std::string& raw, bool two_sided) {
    const auto v = number(raw);
    return v ? econ::significance_stars(*v, two_sided) : std::string();
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s + ' ' : s + std::string(width - s.size(), ' ');
}

std::string lpad(const std::string& s, std::size_t width) {
    return s.size() >= width ? ' ' + s : std::string(width - s.size(), ' ') + s;
}

struct Columns {
    const csv::Table& t;
    const std::vector<std::string>& row;
    const std::string& operator[](const std::string& name) const {
        const auto idx = t.column(name);
        if (!idx) throw std::runtime_error("missing column '" + name + "'");
        return row.at(*idx);
    }
};

void insample(std::ostringstream& os, const csv::Table& t) {
    os << "Predictive regressions, r(t+1) = a + b x(t) + e (x standardized, HAC t-stats)\n";
    os << pad("predictor", 14) << lpad("beta(%)", 10) << lpad("t", 9) << "  " << pad("1s/2s", 8)
       << lpad("R2(%)", 8) << lpad("R2up(%)", 9) << lpad("R2dn(%)", 9) << lpad("n", 6) << '\n';
    for (const auto& row : t.rows) {
        Columns c{t, row};
        if (!c["control"].empty()) continue;
        os << pad(c["predictor"], 14) << lpad(cell(c["beta"], 100, 4), 10) << lpad(cell(c["t_beta"], 1, 2), 9)
           << "  " << pad(stars(c["t_beta"], false) + "/" + stars(c["t_beta"], true), 8)
           << lpad(cell(c["r2"], 100, 2), 8) << lpad(cell(c["r2_up"], 100, 2), 9)
           << lpad(cell(c["r2_down"], 100, 2), 9) << lpad(c["n"], 6) << '\n';
    }
    bool any = false;
    for (const auto& row : t.rows) {
        Columns c{t, row};
        if (c["control"].empty()) continue;
        if (!any) {
            os << "\nBivariate regressions, r(t+1) = a + b MCI(t) + p z(t) + e\n";
            os << pad("predictor", 14) << pad("control", 10) << lpad("beta(%)", 10) << lpad("t", 8)
               << lpad("phi(%)", 10) << lpad("t", 8) << lpad("R2(%)", 8) << '\n';
            any = true;
        }
        os << pad(c["predictor"], 14) << pad(c["control"], 10) << lpad(cell(c["beta"], 100, 4), 10)
           << lpad(cell(c["t_beta"], 1, 2), 8) << lpad(cell(c["phi"], 100, 4), 10)
           << lpad(cell(c["t_phi"], 1, 2), 8) << lpad(cell(c["r2"], 100, 2), 8) << '\n';
    }
}

void out_of_sample(std::ostringstream& os, const csv::Table& t) {
    os << "Out-of-sample R2 against the historical mean (Clark-West one-sided)\n";
    os << pad("predictor", 22) << lpad("R2os(%)", 9) << lpad("trunc(%)", 10) << lpad("up(%)", 8)
       << lpad("down(%)", 9) << lpad("CW", 8) << lpad("p", 8) << '\n';
    for (const auto& row : t.rows) {
        Columns c{t, row};
        os << pad(c["predictor"], 22) << lpad(cell(c["r2_os"], 100, 2), 9)
           << lpad(cell(c["r2_os_trunc"], 100, 2), 10) << lpad(cell(c["r2_os_up"], 100, 2), 8)
           << lpad(cell(c["r2_os_down"], 100, 2), 9) << lpad(cell(c["cw_stat"], 1, 2), 8)
           << lpad(cell(c["cw_p"], 1, 3), 8) << '\n';
    }
}

void allocation(std::ostringstream& os, const csv::Table& t, const char* title) {
    os << title << '\n';
    os << pad("predictor", 22) << lpad("gamma", 6) << lpad("SR", 8) << lpad("JK", 8) << lpad("CER(%)", 9)
       << lpad("p", 8) << '\n';
    for (const auto& row : t.rows) {
        Columns c{t, row};
        os << pad(c["predictor"], 22) << lpad(cell(c["gamma"], 1, 0), 6) << lpad(cell(c["sharpe"], 1, 4), 8)
           << lpad(cell(c["sharpe_test"], 1, 2), 8) << lpad(cell(c["cer_gain"], 100, 2), 9)
           << lpad(cell(c["cer_p"], 1, 3), 8) << '\n';
    }
}

void sorted(std::ostringstream& os, const csv::Table& t) {
    os << "Connection-sorted portfolios, terminal cumulative return\n";
    std::string last_month;
    for (const auto& row : t.rows) last_month = Columns{t, row}["month"];
    for (const auto& row : t.rows) {
        Columns c{t, row};
        if (c["month"] != last_month) continue;
        os << pad(c["group"], 16) << lpad(cell(c["cum_return"], 100, 2), 10) << "%\n";
    }
}

}  // namespace

std::string summarize_bundle(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
    std::ostringstream os;
    bool any = false;
    auto section = [&](const char* file, auto&& render) {
        if (auto t = load(dir / file)) {
            if (any) os << '\n';
            render(*t);
            any = true;
        }
    };
    section("insample.csv", [&](const csv::Table& t) { insample(os, t); });
    section("oos.csv", [&](const csv::Table& t) { out_of_sample(os, t); });
    section("allocation.csv", [&](const csv::Table& t) { allocation(os, t, "Asset allocation, net of costs"); });
    section("allocation_gross.csv",
            [&](const csv::Table& t) { allocation(os, t, "Asset allocation, before costs"); });
    section("sorted.csv", [&](const csv::Table& t) { sorted(os, t); });
    if (!any) throw std::runtime_error("no report files in " + dir.string());
    os << "\nStars: * 10%, ** 5%, *** 1%; 1s one-sided, 2s two-sided.\n";
    return os.str();
}

}  // namespace mci
