#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "yieldcast/errors.hpp"
#include "yieldcast/numerics.hpp"

namespace yieldcast {

/// Calendar date. Two-digit input years pivot at 70 (>=70 -> 19xx, else 20xx).
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    static Date parse_mdy(const std::string& text);  // MM/DD/YY or MM/DD/YYYY
    static Date parse_iso(const std::string& text);  // YYYY-MM-DD

    std::string to_mdy() const;  // MM/DD/YYYY
    std::string to_iso() const;  // YYYY-MM-DD

    friend auto operator<=>(const Date&, const Date&) = default;
};

/// Ordered maturity grid in months.
class TermGrid {
public:
    explicit TermGrid(std::vector<double> terms);

    /// The 11-term grid: 1, 3, 6 months and 1, 2, 3, 5, 7, 10, 20, 30 years.
    static const TermGrid& treasury();

    const std::vector<double>& terms() const { return terms_; }
    size_t size() const { return terms_.size(); }
    double operator[](size_t i) const { return terms_[i]; }

    Vector as_vector() const;

    friend bool operator==(const TermGrid&, const TermGrid&) = default;

private:
    std::vector<double> terms_;
};

/// One day's yields (percent per annum), aligned to a TermGrid.
struct YieldCurve {
    Date date;
    Vector yields;

    YieldCurve(Date date, Vector yields, const TermGrid& grid);
};

constexpr double kMinYield = -2.0;
constexpr double kMaxYield = 25.0;

/// Date-ascending sequence of curves on one shared grid. Immutable once built.
class YieldSeries {
public:
    YieldSeries(TermGrid grid, std::vector<YieldCurve> curves);

    const TermGrid& grid() const { return grid_; }
    const std::vector<YieldCurve>& curves() const { return curves_; }
    size_t size() const { return curves_.size(); }
    const YieldCurve& operator[](size_t i) const { return curves_[i]; }

    /// T x m matrix of yields, one row per day.
    Matrix as_matrix() const;

    /// Index of the curve with the given date; throws OutOfRange when absent.
    size_t index_of(const Date& date) const;

private:
    TermGrid grid_;
    std::vector<YieldCurve> curves_;
};

enum class MissingDataPolicy {
    DropRow,      // discard rows with any missing cell
    ForwardFill,  // per column, fill from the most recent prior date
};

/// Parse a Treasury par-yield-curve CSV. Rows may appear in any order; the
/// result is sorted date-ascending. Empty or N/A cells are handled per
/// policy; non-numeric or out-of-bounds cells raise MalformedRow.
YieldSeries parse_treasury_csv(std::istream& in, MissingDataPolicy policy);
YieldSeries parse_treasury_csv(const std::string& text, MissingDataPolicy policy);
YieldSeries load_treasury_csv(const std::string& path, MissingDataPolicy policy);

/// Canonical writer: same header, MM/DD/YYYY dates, yields with at least two
/// decimals, round-trip exact.
void write_treasury_csv(std::ostream& out, const YieldSeries& series);
std::string to_treasury_csv(const YieldSeries& series);

/// Contiguous sub-series [start_index, start_index + length).
YieldSeries window(const YieldSeries& series, size_t start_index, size_t length);

}  // namespace yieldcast
