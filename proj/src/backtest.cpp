#include "yieldcast/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace yieldcast {

namespace {

std::string round_trip(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double_or_throw(const std::string& s, long line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw MalformedRow(line, "unparseable number '" + s + "'");
    return v;
}

int resolved_threads(int requested) {
    int n = requested > 0 ? requested
                          : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* cap = std::getenv("YIELDCAST_THREADS")) {
        const int c = std::atoi(cap);
        if (c >= 1) n = std::min(n, c);
    }
    return n;
}

// Index-deterministic parallel loop; results depend only on the per-index
// work, never on scheduling.
void parallel_for(size_t count, int threads, const std::function<void(size_t)>& body) {
    if (count == 0) return;
    threads = static_cast<int>(std::min<size_t>(static_cast<size_t>(threads), count));
    if (threads <= 1) {
        for (size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

void validate_range(const YieldSeries& series, const BacktestConfig& config,
                    long& start, long& end) {
    const long n = static_cast<long>(series.size());
    start = config.start_index >= 0 ? config.start_index : config.window_days;
    end = config.end_index >= 0 ? config.end_index : n - 1;
    if (config.window_days < 1)
        throw Error("backtest: window_days must be positive");
    if (start < config.window_days)
        throw InsufficientData("backtest: evaluation starts before the first full window");
    if (end >= n || start > end)
        throw InsufficientData("backtest: empty evaluation range");
}

}  // namespace

const char* method_name(Method m) {
    switch (m) {
        case Method::GP: return "GP";
        case Method::MVTS: return "MVTS";
        case Method::TSNS: return "TSNS";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == "gp") return Method::GP;
    if (lower == "mvts") return Method::MVTS;
    if (lower == "tsns") return Method::TSNS;
    throw Error("unknown method '" + name + "' (expected gp, mvts or tsns)");
}

ForecastRecord::ForecastRecord(Date date_, Method method_, Vector predicted_,
                               Vector actual_, std::optional<Vector> lo,
                               std::optional<Vector> hi)
    : date(date_),
      method(method_),
      predicted(std::move(predicted_)),
      actual(std::move(actual_)),
      interval_lo(std::move(lo)),
      interval_hi(std::move(hi)) {
    if (predicted.size() != actual.size())
        throw DimensionMismatch("ForecastRecord: predicted/actual size mismatch");
    squared_error = (predicted - actual).array().square();
}

std::vector<ForecastRecord> rolling_backtest(const YieldSeries& series,
                                             const BacktestConfig& config) {
    long start = 0, end = 0;
    validate_range(series, config, start, end);
    const size_t count = static_cast<size_t>(end - start + 1);
    std::vector<ForecastRecord> records(count);

    if (config.method == Method::GP) {
        // Sequential filter over [0, end]; pre-observation forecasts at the
        // evaluation days are kept, the warm-up ones discarded.
        const YieldSeries run_span = window(series, 0, static_cast<size_t>(end) + 1);
        const auto forecasts = run_filter(run_span, config.dgp);
        for (long d = start; d <= end; ++d) {
            const auto& fc = forecasts[static_cast<size_t>(d - 1)];
            const auto& actual = series[static_cast<size_t>(d)];
            records[static_cast<size_t>(d - start)] =
                ForecastRecord(actual.date, Method::GP, fc.mean, actual.yields,
                               fc.interval_lo, fc.interval_hi);
        }
        return records;
    }

    const int threads = resolved_threads(config.threads);
    const Matrix all = series.as_matrix();

    if (config.method == Method::MVTS) {
        parallel_for(count, threads, [&](size_t i) {
            const long d = start + static_cast<long>(i);
            const Matrix train = all.middleRows(d - config.window_days, config.window_days);
            auto [order, model] = select_order(train, config.var_max_order);
            const Vector predicted = forecast_var(model, train.bottomRows(order));
            const auto& actual = series[static_cast<size_t>(d)];
            records[i] = ForecastRecord(actual.date, Method::MVTS, predicted, actual.yields);
        });
        return records;
    }

    // TSNS: per-window Nelson-Siegel factors, VAR on the factor series.
    std::vector<double> lambda_grid = config.lambda_grid;
    if (config.freeze_lambda) {
        const YieldSeries first_window =
            window(series, static_cast<size_t>(start - config.window_days),
                   static_cast<size_t>(config.window_days));
        const double frozen = extract_ns_factors(first_window, lambda_grid).lambda;
        lambda_grid = {frozen};
    }
    parallel_for(count, threads, [&](size_t i) {
        const long d = start + static_cast<long>(i);
        const YieldSeries train = window(series, static_cast<size_t>(d - config.window_days),
                                         static_cast<size_t>(config.window_days));
        const NsFactorSeries factors = extract_ns_factors(train, lambda_grid);
        const Vector predicted = forecast_dns(factors, series.grid(), config.var_max_order);
        const auto& actual = series[static_cast<size_t>(d)];
        records[i] = ForecastRecord(actual.date, Method::TSNS, predicted, actual.yields);
    });
    return records;
}

RmseReport rmse_per_term(const std::vector<ForecastRecord>& records) {
    if (records.empty()) throw EmptyRecords("rmse_per_term: no records");
    const Method method = records.front().method;
    const Eigen::Index m = records.front().squared_error.size();

    Vector sums = Vector::Zero(m);
    Date first = records.front().date, last = records.front().date;
    for (const auto& rec : records) {
        if (rec.method != method)
            throw Error("rmse_per_term: mixed methods in record set");
        if (rec.squared_error.size() != m)
            throw DimensionMismatch("rmse_per_term: inconsistent term count");
        sums += rec.squared_error;
        first = std::min(first, rec.date);
        last = std::max(last, rec.date);
    }

    RmseReport report;
    report.method = method;
    report.n = static_cast<long>(records.size());
    report.first_date = first;
    report.last_date = last;
    report.rmse.resize(static_cast<size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j)
        report.rmse[static_cast<size_t>(j)] = std::sqrt(sums[j] / static_cast<double>(report.n));
    report.pooled = std::sqrt(sums.sum() / static_cast<double>(report.n));
    return report;
}

Region region_of_term(double term_months) {
    if (term_months <= 12.0) return Region::Short;
    if (term_months <= 60.0) return Region::Medium;
    return Region::Long;
}

ComparisonTable compare_report(const std::vector<RmseReport>& reports) {
    if (reports.empty()) throw EmptyRecords("compare_report: no reports");
    const auto& ref = reports.front();
    for (const auto& rep : reports) {
        if (rep.n != ref.n || !(rep.first_date == ref.first_date) ||
            !(rep.last_date == ref.last_date))
            throw MismatchedRanges("compare_report: reports cover different ranges");
        if (!(rep.grid == ref.grid))
            throw MismatchedRanges("compare_report: reports use different grids");
    }

    ComparisonTable table;
    table.grid = ref.grid;
    table.reports = reports;

    auto region_winner = [&](Region region) -> std::optional<Method> {
        for (size_t cand = 0; cand < reports.size(); ++cand) {
            bool dominates = true;
            bool any_term = false;
            for (size_t j = 0; j < ref.grid.size() && dominates; ++j) {
                if (region_of_term(ref.grid[j]) != region) continue;
                any_term = true;
                for (size_t other = 0; other < reports.size(); ++other) {
                    if (other == cand) continue;
                    if (!(reports[cand].rmse[j] < reports[other].rmse[j])) {
                        dominates = false;
                        break;
                    }
                }
            }
            if (dominates && any_term && reports.size() > 1) return reports[cand].method;
        }
        return std::nullopt;
    };
    table.winner_short = region_winner(Region::Short);
    table.winner_medium = region_winner(Region::Medium);
    table.winner_long = region_winner(Region::Long);
    return table;
}

void write_records_csv(std::ostream& out, const std::vector<ForecastRecord>& records) {
    out << "date,method,term_months,predicted,actual,squared_error,interval_lo,interval_hi\n";
    const auto& grid = TermGrid::treasury();
    for (const auto& rec : records) {
        for (Eigen::Index j = 0; j < rec.predicted.size(); ++j) {
            const auto t = static_cast<size_t>(j);
            out << rec.date.to_iso() << ',' << method_name(rec.method) << ','
                << round_trip(grid[t]) << ',' << round_trip(rec.predicted[j]) << ','
                << round_trip(rec.actual[j]) << ',' << round_trip(rec.squared_error[j])
                << ',';
            if (rec.interval_lo) out << round_trip((*rec.interval_lo)[j]);
            out << ',';
            if (rec.interval_hi) out << round_trip((*rec.interval_hi)[j]);
            out << '\n';
        }
    }
}

std::vector<ForecastRecord> read_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) ||
        line.rfind("date,method,term_months", 0) != 0)
        throw MalformedHeader("records csv: unexpected header");

    struct Partial {
        Date date;
        Method method;
        std::vector<double> predicted, actual, lo, hi;
        bool has_interval = false;
    };
    std::vector<Partial> partials;

    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(s);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!s.empty() && s.back() == ',') cells.push_back("");
        return cells;
    };

    long line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() < 6) throw MalformedRow(line_number, "too few cells");
        cells.resize(8);
        const Date date = Date::parse_iso(cells[0]);
        const Method method = method_from_name(cells[1]);
        if (partials.empty() || !(partials.back().date == date) ||
            partials.back().method != method) {
            partials.push_back({date, method, {}, {}, {}, {}, false});
        }
        auto& p = partials.back();
        p.predicted.push_back(parse_double_or_throw(cells[3], line_number));
        p.actual.push_back(parse_double_or_throw(cells[4], line_number));
        if (!cells[6].empty() && !cells[7].empty()) {
            p.has_interval = true;
            p.lo.push_back(parse_double_or_throw(cells[6], line_number));
            p.hi.push_back(parse_double_or_throw(cells[7], line_number));
        }
    }

    std::vector<ForecastRecord> records;
    records.reserve(partials.size());
    for (auto& p : partials) {
        auto to_vec = [](const std::vector<double>& v) {
            return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()))
                .eval();
        };
        std::optional<Vector> lo, hi;
        if (p.has_interval) {
            lo = to_vec(p.lo);
            hi = to_vec(p.hi);
        }
        records.emplace_back(p.date, p.method, to_vec(p.predicted), to_vec(p.actual),
                             std::move(lo), std::move(hi));
    }
    return records;
}

void write_report_csv(std::ostream& out, const ComparisonTable& table) {
    out << "term_months";
    for (const auto& rep : table.reports) out << ',' << method_name(rep.method);
    out << '\n';
    for (size_t j = 0; j < table.grid.size(); ++j) {
        out << round_trip(table.grid[j]);
        for (const auto& rep : table.reports) out << ',' << round_trip(rep.rmse[j]);
        out << '\n';
    }
}

std::string report_json(const ComparisonTable& table) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["units"] = {{"term", "months"}, {"rmse", "percent"},
                  {"kernel_lengthscale", "years"}};
    j["n"] = table.reports.empty() ? 0 : table.reports.front().n;
    if (!table.reports.empty()) {
        j["date_range"] = {{"from", table.reports.front().first_date.to_iso()},
                           {"to", table.reports.front().last_date.to_iso()}};
    }
    for (const auto& rep : table.reports) {
        nlohmann::json per_term;
        for (size_t t = 0; t < table.grid.size(); ++t)
            per_term[round_trip(table.grid[t])] = rep.rmse[t];
        j["methods"][method_name(rep.method)] = {{"per_term", per_term},
                                                 {"pooled", rep.pooled}};
    }
    auto winner = [](const std::optional<Method>& m) -> nlohmann::json {
        if (!m) return nullptr;
        return method_name(*m);
    };
    j["regions"] = {{"short", winner(table.winner_short)},
                    {"medium", winner(table.winner_medium)},
                    {"long", winner(table.winner_long)}};
    return j.dump(2) + "\n";
}

}  // namespace yieldcast
