#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "yieldcast/backtest.hpp"
#include "yieldcast/basis.hpp"
#include "yieldcast/data.hpp"
#include "yieldcast/dynamic_gp.hpp"
#include "yieldcast/gp.hpp"
#include "yieldcast/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

// All outputs go through a temp file followed by a rename.
void write_file_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw yieldcast::Error("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out) throw yieldcast::Error("short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

yieldcast::MissingDataPolicy policy_from_name(const std::string& name) {
    if (name == "drop") return yieldcast::MissingDataPolicy::DropRow;
    if (name == "ffill") return yieldcast::MissingDataPolicy::ForwardFill;
    throw CLI::ValidationError("--policy", "expected 'drop' or 'ffill'");
}

long count_data_rows(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    long rows = -1;  // header
    while (std::getline(in, line))
        if (line.find_first_not_of(" \t\r\n") != std::string::npos) ++rows;
    return std::max(rows, 0L);
}

json params_to_json(const yieldcast::KernelParams& p) {
    return {{"rbf_variance", p.rbf_variance},
            {"rbf_lengthscale_years", p.rbf_lengthscale},
            {"linear_variance", p.linear_variance},
            {"noise_sigma", p.noise_sigma}};
}

struct IngestArgs {
    std::string input;
    std::string output;
    std::string policy = "drop";
};

int run_ingest(const IngestArgs& args) {
    const long total = count_data_rows(args.input);
    const auto series =
        yieldcast::load_treasury_csv(args.input, policy_from_name(args.policy));
    write_file_atomic(args.output, yieldcast::to_treasury_csv(series));
    const long kept = static_cast<long>(series.size());
    std::cout << kept << " rows, " << total - kept << " dropped\n";
    return kExitOk;
}

struct FitArgs {
    std::string input;
    std::string date;
    std::string method;
    std::string output;  // empty = stdout
    double ns_lambda = 0.0609;
    double coverage = 0.95;
    std::uint64_t seed = 42;
    std::string basis = "fourier";
    int fourier_pairs = 5;
    double fourier_period = 720.0;
    std::vector<double> exp_rates{-0.05, -0.01};
    std::vector<double> gauss_centers{1, 60, 180, 360};
    double gauss_lambda = 1e-4;
    double penalty = 0.0;
};

json fit_gp_json(const yieldcast::TermGrid& grid, const yieldcast::YieldCurve& curve,
                 const FitArgs& args) {
    using namespace yieldcast;
    const Vector zero = Vector::Zero(static_cast<Eigen::Index>(grid.size()));
    FitOptions opts;
    opts.seed = args.seed;
    const KernelParams params = fit_hyperparams(
        grid.terms(), curve.yields, zero, default_init(grid.terms(), curve.yields), opts);
    const GpPosterior post =
        posterior(params, grid.terms(), curve.yields, zero, grid.terms(), zero);
    const Interval iv = predictive_interval(post, args.coverage);

    json j;
    j["hyperparameters"] = params_to_json(params);
    j["fitted"] = std::vector<double>(post.posterior_mean.begin(), post.posterior_mean.end());
    j["interval_lo"] = std::vector<double>(iv.lo.begin(), iv.lo.end());
    j["interval_hi"] = std::vector<double>(iv.hi.begin(), iv.hi.end());
    j["coverage"] = args.coverage;
    j["log_marginal_likelihood"] =
        log_marginal_likelihood(params, grid.terms(), curve.yields, zero);
    return j;
}

json fit_ns_json(const yieldcast::TermGrid& grid, const yieldcast::YieldCurve& curve,
                 const FitArgs& args) {
    using namespace yieldcast;
    const BasisFit fit = fit_ols(NelsonSiegelBasis{args.ns_lambda}, grid, curve);
    const Vector fitted = evaluate(fit, grid.terms());
    json j;
    j["lambda"] = args.ns_lambda;
    j["beta1"] = fit.coefficients[0];
    j["beta2"] = fit.coefficients[1];
    j["beta3"] = fit.coefficients[2];
    j["fitted"] = std::vector<double>(fitted.begin(), fitted.end());
    return j;
}

json fit_basis_json(const yieldcast::TermGrid& grid, const yieldcast::YieldCurve& curve,
                    const FitArgs& args) {
    using namespace yieldcast;
    BasisSpec spec = FourierBasis{args.fourier_period, args.fourier_pairs};
    if (args.basis == "exponential") spec = ExponentialBasis{args.exp_rates};
    else if (args.basis == "gaussian") spec = GaussianRbfBasis{args.gauss_centers, args.gauss_lambda};
    else if (args.basis == "ns") spec = NelsonSiegelBasis{args.ns_lambda};
    else if (args.basis != "fourier")
        throw Error("unknown basis '" + args.basis + "'");

    const BasisFit fit = args.penalty > 0.0
                             ? fit_penalized(spec, grid, curve, args.penalty)
                             : fit_ols(spec, grid, curve);
    const Vector fitted = evaluate(fit, grid.terms());
    json j;
    j["basis"] = basis_name(spec);
    j["penalty_lambda"] = fit.penalty_lambda;
    j["coefficients"] =
        std::vector<double>(fit.coefficients.begin(), fit.coefficients.end());
    j["fitted"] = std::vector<double>(fitted.begin(), fitted.end());
    return j;
}

int run_fit(const FitArgs& args) {
    using namespace yieldcast;
    const auto series = load_treasury_csv(args.input, MissingDataPolicy::DropRow);
    const Date date = Date::parse_iso(args.date);
    const auto& curve = series[series.index_of(date)];
    const auto& grid = series.grid();

    json j;
    j["schema_version"] = 1;
    j["date"] = date.to_iso();
    j["method"] = args.method;
    j["terms_months"] = grid.terms();
    j["actual"] = std::vector<double>(curve.yields.begin(), curve.yields.end());

    if (args.method == "gp") j.update(fit_gp_json(grid, curve, args));
    else if (args.method == "ns") j.update(fit_ns_json(grid, curve, args));
    else j.update(fit_basis_json(grid, curve, args));

    const std::string text = j.dump(2) + "\n";
    if (args.output.empty()) std::cout << text;
    else write_file_atomic(args.output, text);
    return kExitOk;
}

struct BacktestArgs {
    std::string input;
    std::string out_dir;
    std::vector<std::string> methods{"gp", "mvts", "tsns"};
    int window = 250;
    std::string from_date, to_date;
    bool plots = false;
    std::uint64_t seed = 42;
    double coverage = 0.95;
    int refit_every = 1;
    int multistart_every = 50;
    int kmax = 5;
    bool freeze_lambda = false;
    int threads = 0;
    std::string policy = "drop";
};

void emit_plots(const fs::path& dir, const yieldcast::YieldSeries& series,
                const std::map<yieldcast::Method, std::vector<yieldcast::ForecastRecord>>& runs);

int run_backtest(const BacktestArgs& args) {
    using namespace yieldcast;
    const auto series = load_treasury_csv(args.input, policy_from_name(args.policy));

    BacktestConfig base;
    base.window_days = args.window;
    base.dgp.coverage = args.coverage;
    base.dgp.refit_every = args.refit_every;
    base.dgp.multistart_every = args.multistart_every;
    base.dgp.seed = args.seed;
    base.var_max_order = args.kmax;
    base.freeze_lambda = args.freeze_lambda;
    base.threads = args.threads;

    if (!args.from_date.empty()) {
        const Date from = Date::parse_iso(args.from_date);
        size_t i = 0;
        while (i < series.size() && series[i].date < from) ++i;
        base.start_index = static_cast<long>(i);
    }
    if (!args.to_date.empty()) {
        const Date to = Date::parse_iso(args.to_date);
        long i = static_cast<long>(series.size()) - 1;
        while (i >= 0 && to < series[static_cast<size_t>(i)].date) --i;
        base.end_index = i;
    }

    std::map<Method, std::vector<ForecastRecord>> runs;
    int failure_code = kExitOk;
    for (const auto& name : args.methods) {
        const Method method = method_from_name(name);
        BacktestConfig config = base;
        config.method = method;
        try {
            runs[method] = rolling_backtest(series, config);
        } catch (const NotPositiveDefinite& e) {
            std::cerr << "method " << method_name(method) << " failed: " << e.what() << "\n";
            failure_code = kExitNumerical;
        } catch (const Error& e) {
            std::cerr << "method " << method_name(method) << " failed: " << e.what() << "\n";
            if (failure_code == kExitOk) failure_code = kExitData;
        }
    }
    if (runs.empty()) return failure_code == kExitOk ? kExitData : failure_code;

    const fs::path dir(args.out_dir);
    std::vector<RmseReport> reports;
    for (const auto& [method, records] : runs) {
        std::ostringstream csv;
        write_records_csv(csv, records);
        std::string name = method_name(method);
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        write_file_atomic(dir / ("records_" + name + ".csv"), csv.str());
        reports.push_back(rmse_per_term(records));
    }

    const ComparisonTable table = compare_report(reports);
    std::ostringstream report_csv;
    write_report_csv(report_csv, table);
    write_file_atomic(dir / "report.csv", report_csv.str());
    write_file_atomic(dir / "report.json", report_json(table));

    if (args.plots) emit_plots(dir / "plots", series, runs);

    std::cout << "evaluated " << table.reports.front().n << " days ("
              << table.reports.front().first_date.to_iso() << " to "
              << table.reports.front().last_date.to_iso() << ")\n";
    for (size_t j = 0; j < table.grid.size(); ++j) {
        std::cout << table.grid[j] << " mo";
        for (const auto& rep : table.reports)
            std::cout << "  " << method_name(rep.method) << "=" << rep.rmse[j];
        std::cout << "\n";
    }
    return failure_code;
}

void emit_plots(const fs::path& dir, const yieldcast::YieldSeries& series,
                const std::map<yieldcast::Method, std::vector<yieldcast::ForecastRecord>>& runs) {
    using namespace yieldcast;
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#555555"};
    const auto& grid = TermGrid::treasury();

    // Squared-error series per term, one chart per method pair.
    std::vector<Method> methods;
    for (const auto& [m, _] : runs) methods.push_back(m);
    for (size_t a = 0; a < methods.size(); ++a) {
        for (size_t b = a + 1; b < methods.size(); ++b) {
            const auto& ra = runs.at(methods[a]);
            const auto& rb = runs.at(methods[b]);
            for (size_t j = 0; j < grid.size(); ++j) {
                SvgSeries sa{method_name(methods[a]), kColors[0], {}, {}, false};
                SvgSeries sb{method_name(methods[b]), kColors[1], {}, {}, false};
                for (size_t i = 0; i < ra.size(); ++i) {
                    sa.x.push_back(static_cast<double>(i));
                    sa.y.push_back(ra[i].squared_error[static_cast<Eigen::Index>(j)]);
                }
                for (size_t i = 0; i < rb.size(); ++i) {
                    sb.x.push_back(static_cast<double>(i));
                    sb.y.push_back(rb[i].squared_error[static_cast<Eigen::Index>(j)]);
                }
                SvgChartSpec spec;
                spec.title = std::to_string(static_cast<int>(grid[j])) +
                             " month squared error: " + std::string(method_name(methods[a])) +
                             " vs " + method_name(methods[b]);
                spec.x_label = "evaluation day";
                spec.y_label = "squared error (percent^2)";
                const std::string file =
                    "sq_error_" + std::to_string(static_cast<int>(grid[j])) + "mo_" +
                    method_name(methods[a]) + "_vs_" + method_name(methods[b]) + ".svg";
                write_file_atomic(dir / file, render_line_chart(spec, {sa, sb}));
            }
        }
    }

    // Four evenly spaced sample-day curve overlays.
    if (runs.empty()) return;
    const auto& any = runs.begin()->second;
    const size_t n = any.size();
    for (int k = 1; k <= 4; ++k) {
        const size_t i = std::min(n - 1, k * (n + 1) / 5);
        const Date date = any[i].date;
        std::vector<SvgSeries> overlay;
        SvgSeries actual{"actual", kColors[3], {}, {}, true};
        const auto& curve = series[series.index_of(date)];
        for (size_t j = 0; j < grid.size(); ++j) {
            actual.x.push_back(grid[j]);
            actual.y.push_back(curve.yields[static_cast<Eigen::Index>(j)]);
        }
        overlay.push_back(std::move(actual));
        int color = 0;
        for (const auto& [method, records] : runs) {
            SvgSeries s{method_name(method), kColors[color++ % 3], {}, {}, true};
            for (size_t j = 0; j < grid.size(); ++j) {
                s.x.push_back(grid[j]);
                s.y.push_back(records[i].predicted[static_cast<Eigen::Index>(j)]);
            }
            overlay.push_back(std::move(s));
        }
        SvgChartSpec spec;
        spec.title = "Estimates for " + date.to_iso();
        spec.x_label = "term (months)";
        spec.y_label = "yield (percent)";
        write_file_atomic(dir / ("overlay_" + date.to_iso() + ".svg"),
                          render_line_chart(spec, overlay));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Yield curve forecasting: dynamic GP filter, VAR and "
                 "dynamic Nelson-Siegel comparators, rolling backtests"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* cmd_ingest = app.add_subcommand("ingest", "Validate and canonicalize a Treasury CSV");
    cmd_ingest->add_option("--input", ingest.input, "Treasury CSV path")->required();
    cmd_ingest->add_option("--output", ingest.output, "canonical CSV path")->required();
    cmd_ingest->add_option("--policy", ingest.policy, "missing data policy: drop|ffill")
        ->check(CLI::IsMember({"drop", "ffill"}));

    FitArgs fit;
    auto* cmd_fit = app.add_subcommand("fit", "Fit one day's curve and emit JSON");
    cmd_fit->add_option("--input", fit.input, "Treasury CSV path")->required();
    cmd_fit->add_option("--date", fit.date, "day to fit, YYYY-MM-DD")->required();
    cmd_fit->add_option("--method", fit.method, "gp|ns|ols-basis")
        ->required()
        ->check(CLI::IsMember({"gp", "ns", "ols-basis"}));
    cmd_fit->add_option("--output", fit.output, "output path (default stdout)");
    cmd_fit->add_option("--lambda", fit.ns_lambda, "Nelson-Siegel decay per month");
    cmd_fit->add_option("--coverage", fit.coverage, "GP interval coverage");
    cmd_fit->add_option("--seed", fit.seed, "optimizer multi-start seed");
    cmd_fit->add_option("--basis", fit.basis, "ols-basis family: fourier|exponential|gaussian|ns");
    cmd_fit->add_option("--pairs", fit.fourier_pairs, "Fourier sine/cosine pairs");
    cmd_fit->add_option("--period", fit.fourier_period, "Fourier period (months)");
    cmd_fit->add_option("--rates", fit.exp_rates, "exponential basis rates");
    cmd_fit->add_option("--centers", fit.gauss_centers, "gaussian basis centers (months)");
    cmd_fit->add_option("--width", fit.gauss_lambda, "gaussian basis decay");
    cmd_fit->add_option("--penalty", fit.penalty, "roughness penalty lambda (0 = OLS)");

    BacktestArgs bt;
    auto* cmd_bt = app.add_subcommand("backtest", "Rolling one-step-ahead backtest");
    cmd_bt->add_option("--input", bt.input, "Treasury CSV path")->required();
    cmd_bt->add_option("--out", bt.out_dir, "output directory")->required();
    cmd_bt->add_option("--methods", bt.methods, "methods to run")->delimiter(',');
    cmd_bt->add_option("--window", bt.window, "training window (days)");
    cmd_bt->add_option("--from", bt.from_date, "first evaluation date, YYYY-MM-DD");
    cmd_bt->add_option("--to", bt.to_date, "last evaluation date, YYYY-MM-DD");
    cmd_bt->add_flag("--plots", bt.plots, "emit SVG charts");
    cmd_bt->add_option("--seed", bt.seed, "optimizer multi-start seed");
    cmd_bt->add_option("--coverage", bt.coverage, "GP interval coverage");
    cmd_bt->add_option("--refit-every", bt.refit_every, "GP hyperparameter refit cadence");
    cmd_bt->add_option("--multistart-every", bt.multistart_every,
                       "GP full multi-start cadence");
    cmd_bt->add_option("--kmax", bt.kmax, "max VAR order");
    cmd_bt->add_option("--optim-max-evals", bt.optim_max_evals,
                       "simplex evaluation budget per start");
    cmd_bt->add_option("--optim-tol", bt.optim_tol, "simplex diameter tolerance");
    cmd_bt->add_flag("--freeze-lambda", bt.freeze_lambda,
                     "select the Nelson-Siegel lambda once on the first window");
    cmd_bt->add_option("--threads", bt.threads, "worker threads (0 = auto)");
    cmd_bt->add_option("--policy", bt.policy, "missing data policy: drop|ffill")
        ->check(CLI::IsMember({"drop", "ffill"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (cmd_ingest->parsed()) return run_ingest(ingest);
        if (cmd_fit->parsed()) return run_fit(fit);
        if (!bt.from_date.empty() && !bt.to_date.empty() &&
            yieldcast::Date::parse_iso(bt.to_date) < yieldcast::Date::parse_iso(bt.from_date)) {
            std::cerr << "--from is after --to\n";
            return kExitUsage;
        }
        return run_backtest(bt);
    } catch (const yieldcast::NotPositiveDefinite& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const yieldcast::RankDeficient& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const yieldcast::NonFiniteObjective& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const yieldcast::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
