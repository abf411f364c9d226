#include "yieldcast/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

namespace yieldcast {

namespace {

constexpr std::array<const char*, 11> kTermHeaders = {
    "1 Mo", "3 Mo", "6 Mo", "1 Yr", "2 Yr", "3 Yr",
    "5 Yr", "7 Yr", "10 Yr", "20 Yr", "30 Yr"};

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static const int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return d[m - 1];
}

bool valid_date(int y, int m, int d) {
    return y >= 1000 && y <= 9999 && m >= 1 && m <= 12 && d >= 1 &&
           d <= days_in_month(y, m);
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            out.push_back(trim(cell));
            cell.clear();
        } else {
            cell += ch;
        }
    }
    out.push_back(trim(cell));
    return out;
}

bool is_missing_cell(const std::string& s) {
    return s.empty() || s == "N/A" || s == "NA" || s == "n/a";
}

std::optional<double> parse_number(const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

/// Shortest fixed-notation representation that round-trips, padded to at
/// least two decimals.
std::string format_yield(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
    std::string s(buf, res.ptr);
    auto dot = s.find('.');
    if (dot == std::string::npos) {
        s += ".00";
    } else if (s.size() - dot - 1 < 2) {
        s.append(2 - (s.size() - dot - 1), '0');
    }
    return s;
}

}  // namespace

Date Date::parse_mdy(const std::string& text) {
    int m = 0, d = 0, y = 0;
    char extra = 0;
    const int n = std::sscanf(text.c_str(), "%d/%d/%d%c", &m, &d, &y, &extra);
    if (n != 3) throw Error("unparseable date: '" + text + "'");
    if (text.size() - text.rfind('/') == 3)  // two-digit year
        y = y >= 70 ? 1900 + y : 2000 + y;
    if (!valid_date(y, m, d)) throw Error("invalid date: '" + text + "'");
    return {y, m, d};
}

Date Date::parse_iso(const std::string& text) {
    int y = 0, m = 0, d = 0;
    char extra = 0;
    const int n = std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &m, &d, &extra);
    if (n != 3 || !valid_date(y, m, d)) throw Error("invalid date: '" + text + "'");
    return {y, m, d};
}

std::string Date::to_mdy() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d/%02d/%04d", month, day, year);
    return buf;
}

std::string Date::to_iso() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

TermGrid::TermGrid(std::vector<double> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw Error("TermGrid: empty");
    for (size_t i = 0; i < terms_.size(); ++i) {
        if (!std::isfinite(terms_[i]) || terms_[i] <= 0.0)
            throw Error("TermGrid: terms must be positive and finite");
        if (i > 0 && terms_[i] <= terms_[i - 1])
            throw Error("TermGrid: terms must be strictly increasing");
    }
}

const TermGrid& TermGrid::treasury() {
    static const TermGrid grid({1, 3, 6, 12, 24, 36, 60, 84, 120, 240, 360});
    return grid;
}

Vector TermGrid::as_vector() const {
    return Eigen::Map<const Vector>(terms_.data(), static_cast<Eigen::Index>(terms_.size()));
}

YieldCurve::YieldCurve(Date date_, Vector yields_, const TermGrid& grid)
    : date(date_), yields(std::move(yields_)) {
    if (static_cast<size_t>(yields.size()) != grid.size())
        throw DimensionMismatch("YieldCurve: yields do not match grid size");
    for (Eigen::Index i = 0; i < yields.size(); ++i) {
        if (!std::isfinite(yields[i]) || yields[i] < kMinYield || yields[i] > kMaxYield)
            throw Error("YieldCurve: yield out of sanity bounds at term index " +
                        std::to_string(i));
    }
}

YieldSeries::YieldSeries(TermGrid grid, std::vector<YieldCurve> curves)
    : grid_(std::move(grid)), curves_(std::move(curves)) {
    if (curves_.empty()) throw EmptySeries("YieldSeries: no curves");
    for (size_t i = 0; i < curves_.size(); ++i) {
        if (static_cast<size_t>(curves_[i].yields.size()) != grid_.size())
            throw DimensionMismatch("YieldSeries: curve grid mismatch");
        if (i > 0 && !(curves_[i - 1].date < curves_[i].date))
            throw Error("YieldSeries: dates must be strictly increasing");
    }
}

Matrix YieldSeries::as_matrix() const {
    Matrix m(static_cast<Eigen::Index>(curves_.size()),
             static_cast<Eigen::Index>(grid_.size()));
    for (size_t i = 0; i < curves_.size(); ++i)
        m.row(static_cast<Eigen::Index>(i)) = curves_[i].yields.transpose();
    return m;
}

size_t YieldSeries::index_of(const Date& date) const {
    auto it = std::lower_bound(curves_.begin(), curves_.end(), date,
                               [](const YieldCurve& c, const Date& d) { return c.date < d; });
    if (it == curves_.end() || !(it->date == date))
        throw OutOfRange("no curve for date " + date.to_iso());
    return static_cast<size_t>(it - curves_.begin());
}

YieldSeries parse_treasury_csv(std::istream& in, MissingDataPolicy policy) {
    std::string line;
    if (!std::getline(in, line))
        throw MalformedHeader("empty input");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB &&
        static_cast<unsigned char>(line[2]) == 0xBF)
        line.erase(0, 3);  // UTF-8 BOM

    const auto header = split_csv_line(line);
    long date_col = -1;
    std::array<long, 11> term_col;
    term_col.fill(-1);
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "Date") date_col = static_cast<long>(i);
        for (size_t t = 0; t < kTermHeaders.size(); ++t)
            if (header[i] == kTermHeaders[t]) term_col[t] = static_cast<long>(i);
    }
    if (date_col < 0) throw MalformedHeader("missing column 'Date'");
    for (size_t t = 0; t < kTermHeaders.size(); ++t)
        if (term_col[t] < 0)
            throw MalformedHeader(std::string("missing column '") + kTermHeaders[t] + "'");

    struct RawRow {
        Date date;
        std::array<std::optional<double>, 11> cells;
        long line_number;
    };
    std::vector<RawRow> rows;

    long line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() <= static_cast<size_t>(date_col))
            throw MalformedRow(line_number, "missing date cell");
        RawRow row;
        row.line_number = line_number;
        try {
            row.date = Date::parse_mdy(cells[date_col]);
        } catch (const Error& e) {
            throw MalformedRow(line_number, e.what());
        }
        for (size_t t = 0; t < 11; ++t) {
            const auto col = static_cast<size_t>(term_col[t]);
            const std::string cell = col < cells.size() ? cells[col] : "";
            if (is_missing_cell(cell)) continue;
            const auto v = parse_number(cell);
            if (!v)
                throw MalformedRow(line_number, std::string("unparseable value '") + cell +
                                                    "' in column '" + kTermHeaders[t] + "'");
            if (!std::isfinite(*v) || *v < kMinYield || *v > kMaxYield)
                throw MalformedRow(line_number,
                                   std::string("value out of bounds in column '") +
                                       kTermHeaders[t] + "'");
            row.cells[t] = *v;
        }
        rows.push_back(std::move(row));
    }

    std::sort(rows.begin(), rows.end(),
              [](const RawRow& a, const RawRow& b) { return a.date < b.date; });
    for (size_t i = 1; i < rows.size(); ++i)
        if (rows[i].date == rows[i - 1].date)
            throw MalformedRow(rows[i].line_number,
                               "duplicate date " + rows[i].date.to_iso());

    std::vector<YieldCurve> curves;
    std::array<std::optional<double>, 11> last_seen;
    for (auto& row : rows) {
        bool complete = true;
        for (size_t t = 0; t < 11; ++t) {
            if (row.cells[t]) {
                last_seen[t] = row.cells[t];
                continue;
            }
            if (policy == MissingDataPolicy::ForwardFill) {
                if (!last_seen[t])
                    throw MalformedRow(row.line_number,
                                       std::string("missing value in column '") +
                                           kTermHeaders[t] + "' with no prior row to fill from");
                row.cells[t] = last_seen[t];
            } else {
                complete = false;
            }
        }
        if (!complete) continue;  // DropRow
        Vector y(11);
        for (size_t t = 0; t < 11; ++t) y[static_cast<Eigen::Index>(t)] = *row.cells[t];
        curves.emplace_back(row.date, std::move(y), TermGrid::treasury());
    }

    if (curves.empty()) throw EmptySeries("no usable rows after applying policy");
    return YieldSeries(TermGrid::treasury(), std::move(curves));
}

YieldSeries parse_treasury_csv(const std::string& text, MissingDataPolicy policy) {
    std::istringstream in(text);
    return parse_treasury_csv(in, policy);
}

YieldSeries load_treasury_csv(const std::string& path, MissingDataPolicy policy) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return parse_treasury_csv(in, policy);
}

void write_treasury_csv(std::ostream& out, const YieldSeries& series) {
    out << "Date";
    for (const char* h : kTermHeaders) out << ',' << h;
    out << '\n';
    for (const auto& curve : series.curves()) {
        out << curve.date.to_mdy();
        for (Eigen::Index i = 0; i < curve.yields.size(); ++i)
            out << ',' << format_yield(curve.yields[i]);
        out << '\n';
    }
}

std::string to_treasury_csv(const YieldSeries& series) {
    std::ostringstream out;
    write_treasury_csv(out, series);
    return out.str();
}

YieldSeries window(const YieldSeries& series, size_t start_index, size_t length) {
    if (length == 0) throw OutOfRange("window: length must be positive");
    if (start_index + length > series.size())
        throw OutOfRange("window: [" + std::to_string(start_index) + ", " +
                         std::to_string(start_index + length) + ") exceeds series of " +
                         std::to_string(series.size()));
    std::vector<YieldCurve> curves(series.curves().begin() + static_cast<long>(start_index),
                                   series.curves().begin() +
                                       static_cast<long>(start_index + length));
    return YieldSeries(series.grid(), std::move(curves));
}

}  // namespace yieldcast
