#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "yieldcast/data.hpp"
#include "yieldcast/dynamic_gp.hpp"
#include "yieldcast/ts_models.hpp"

namespace yieldcast {

enum class Method { GP, MVTS, TSNS };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct BacktestConfig {
    Method method = Method::GP;
    int window_days = 250;
    // Evaluation range as indices into the series; -1 = first evaluable day
    // after the window / last day.
    long start_index = -1;
    long end_index = -1;

    DgpConfig dgp;                 // GP
    int var_max_order = 5;         // MVTS and the DNS factor VAR
    std::vector<double> lambda_grid = default_lambda_grid();  // TSNS
    bool freeze_lambda = false;    // select lambda on the first window only

    int threads = 0;  // 0 = hardware concurrency, capped by YIELDCAST_THREADS
};

struct ForecastRecord {
    Date date;
    Method method = Method::GP;
    Vector predicted;
    Vector actual;
    Vector squared_error;
    std::optional<Vector> interval_lo;  // GP only
    std::optional<Vector> interval_hi;

    ForecastRecord() = default;
    ForecastRecord(Date date, Method method, Vector predicted, Vector actual,
                   std::optional<Vector> lo = std::nullopt,
                   std::optional<Vector> hi = std::nullopt);
};

/// One-step-ahead rolling evaluation. MVTS/TSNS train on exactly the
/// window_days curves immediately preceding each test day; the GP filter runs
/// sequentially from the series start and its pre-observation forecasts are
/// recorded over the same dates. No record ever uses data on or after its own
/// date.
std::vector<ForecastRecord> rolling_backtest(const YieldSeries& series,
                                             const BacktestConfig& config);

struct RmseReport {
    Method method = Method::GP;
    TermGrid grid = TermGrid::treasury();
    std::vector<double> rmse;  // per term
    double pooled = 0.0;       // sqrt(sum over days and terms / N), the pooled metric
    long n = 0;
    Date first_date;
    Date last_date;
};

RmseReport rmse_per_term(const std::vector<ForecastRecord>& records);

/// Maturity regions used for the comparison: short <= 1 year, medium 2-5
/// years, long >= 7 years.
enum class Region { Short, Medium, Long };
Region region_of_term(double term_months);

struct ComparisonTable {
    TermGrid grid = TermGrid::treasury();
    std::vector<RmseReport> reports;
    // Region winner: the method strictly best at every term of the region;
    // unset when no method dominates.
    std::optional<Method> winner_short;
    std::optional<Method> winner_medium;
    std::optional<Method> winner_long;
};

/// Reports must share N and date range; throws MismatchedRanges otherwise.
ComparisonTable compare_report(const std::vector<RmseReport>& reports);

// ---- persistence ----

/// Schema: date,method,term_months,predicted,actual,squared_error,
/// interval_lo,interval_hi -- one row per (day, term), empty interval cells
/// for non-GP methods. Values are written with round-trip precision.
void write_records_csv(std::ostream& out, const std::vector<ForecastRecord>& records);
std::vector<ForecastRecord> read_records_csv(std::istream& in);

void write_report_csv(std::ostream& out, const ComparisonTable& table);

/// JSON object: schema_version, n, date range, per-method term -> RMSE maps,
/// pooled RMSE, and region winners.
std::string report_json(const ComparisonTable& table);

}  // namespace yieldcast
