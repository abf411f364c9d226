#include "yieldcast/ts_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace yieldcast {

namespace {

// Stacked regressor matrix: row i holds [1, y_{i-1}, ..., y_{i-k}] for
// response row i, i = k..T-1.
Matrix lagged_design(const Matrix& data, int order) {
    const Eigen::Index t = data.rows();
    const Eigen::Index dim = data.cols();
    const Eigen::Index rows = t - order;
    Matrix x(rows, 1 + dim * order);
    for (Eigen::Index i = 0; i < rows; ++i) {
        x(i, 0) = 1.0;
        for (int lag = 1; lag <= order; ++lag)
            x.block(i, 1 + (lag - 1) * dim, 1, dim) = data.row(order + i - lag);
    }
    return x;
}

// log det of a PSD matrix with eigenvalues floored at 1e-300, so perfectly
// fitting models (zero residual covariance) stay comparable instead of
// producing -inf.
double psd_log_det(const SymMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat(), Eigen::EigenvaluesOnly);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        sum += std::log(std::max(es.eigenvalues()[i], 1e-300));
    return sum;
}

}  // namespace

VarModel fit_var(const Matrix& data, int order) {
    const Eigen::Index t = data.rows();
    const Eigen::Index dim = data.cols();
    if (order < 1) throw Error("fit_var: order must be >= 1");
    if (t - order <= dim * order + 1)
        throw InsufficientData("fit_var: " + std::to_string(t) + " rows cannot support a VAR(" +
                               std::to_string(order) + ") in dimension " + std::to_string(dim));

    const Matrix x = lagged_design(data, order);
    const Matrix y = data.bottomRows(t - order);

    // One shared Gram factorization serves all `dim` equations.
    Matrix gram = x.transpose() * x;
    gram = 0.5 * (gram + gram.transpose().eval());
    Matrix beta;
    try {
        beta = cholesky_spd_auto(SymMatrix(std::move(gram))).solve(x.transpose() * y);
    } catch (const NotPositiveDefinite&) {
        throw RankDeficient("fit_var: lagged design not full rank after escalation");
    }

    VarModel model;
    model.dim = static_cast<int>(dim);
    model.order = order;
    model.intercept = beta.row(0).transpose();
    for (int lag = 1; lag <= order; ++lag)
        model.coef.push_back(beta.middleRows(1 + (lag - 1) * dim, dim).transpose());

    const Matrix resid = y - x * beta;
    Matrix cov = resid.transpose() * resid / static_cast<double>(t - order);
    cov = 0.5 * (cov + cov.transpose().eval());
    model.residual_cov = SymMatrix(std::move(cov));
    return model;
}

double bic(const VarModel& model, const Matrix& data) {
    const double t_eff = static_cast<double>(data.rows() - model.order);
    if (t_eff <= 0) throw InsufficientData("bic: no effective observations");
    const double n_params =
        static_cast<double>(model.dim) * (1.0 + model.dim * model.order);
    return psd_log_det(model.residual_cov) + std::log(t_eff) / t_eff * n_params;
}

std::pair<int, VarModel> select_order(const Matrix& data, int max_order) {
    if (max_order < 1) throw Error("select_order: max_order must be >= 1");
    int best_order = 0;
    double best_bic = std::numeric_limits<double>::infinity();
    std::optional<VarModel> best;
    for (int k = 1; k <= max_order; ++k) {
        VarModel model;
        try {
            model = fit_var(data, k);
        } catch (const InsufficientData&) {
            break;  // higher orders only get worse
        }
        const double score = bic(model, data);
        if (score < best_bic - 1e-12) {
            best_bic = score;
            best_order = k;
            best = std::move(model);
        }
    }
    if (!best) throw InsufficientData("select_order: no order is estimable");
    return {best_order, std::move(*best)};
}

Vector forecast_var(const VarModel& model, const Matrix& recent) {
    if (recent.rows() != model.order || recent.cols() != model.dim)
        throw DimensionMismatch("forecast_var: need exactly `order` rows of width `dim`");
    Vector y = model.intercept;
    for (int lag = 1; lag <= model.order; ++lag)
        y += model.coef[static_cast<size_t>(lag - 1)] *
             recent.row(model.order - lag).transpose();
    return y;
}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 18; ++i) grid.push_back(0.030 + 0.005 * i);
    return grid;
}

NsFactorSeries extract_ns_factors(const YieldSeries& series,
                                  const std::vector<double>& lambda_grid) {
    if (lambda_grid.empty()) throw Error("extract_ns_factors: empty lambda grid");

    const auto t = static_cast<Eigen::Index>(series.size());
    const auto& grid = series.grid();

    double best_lambda = 0.0;
    double best_sse = std::numeric_limits<double>::infinity();
    Matrix best_factors;

    for (double lambda : lambda_grid) {
        const BasisSpec spec = NelsonSiegelBasis{lambda};
        const Matrix x = design_matrix(spec, grid);
        Matrix gram = x.transpose() * x;
        gram = 0.5 * (gram + gram.transpose().eval());
        SpdFactor factor = [&] {
            try {
                return cholesky_spd_auto(SymMatrix(std::move(gram)));
            } catch (const NotPositiveDefinite&) {
                throw RankDeficient("extract_ns_factors: Nelson-Siegel design rank "
                                    "deficient at lambda " + std::to_string(lambda));
            }
        }();

        Matrix factors(t, 3);
        double sse = 0.0;
        for (Eigen::Index i = 0; i < t; ++i) {
            const Vector& y = series[static_cast<size_t>(i)].yields;
            const Vector beta = factor.solve(x.transpose() * y);
            factors.row(i) = beta.transpose();
            sse += (y - x * beta).squaredNorm();
        }
        if (sse < best_sse) {
            best_sse = sse;
            best_lambda = lambda;
            best_factors = std::move(factors);
        }
    }

    NsFactorSeries out;
    out.lambda = best_lambda;
    out.factors = std::move(best_factors);
    out.dates.reserve(series.size());
    for (const auto& curve : series.curves()) out.dates.push_back(curve.date);
    return out;
}

Vector forecast_dns(const NsFactorSeries& factors, const TermGrid& grid, int max_order) {
    auto [order, model] = select_order(factors.factors, max_order);
    const Matrix recent = factors.factors.bottomRows(order);
    const Vector beta_next = forecast_var(model, recent);
    const Matrix loadings = design_matrix(NelsonSiegelBasis{factors.lambda}, grid);
    return loadings * beta_next;
}

}  // namespace yieldcast
