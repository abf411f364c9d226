#pragma once

#include <utility>
#include <vector>

#include "yieldcast/basis.hpp"
#include "yieldcast/data.hpp"
#include "yieldcast/numerics.hpp"

namespace yieldcast {

/// VAR(k): y_i = intercept + sum_j coef[j-1] * y_{i-j} + e_i.
struct VarModel {
    int dim = 0;
    int order = 0;
    Vector intercept;
    std::vector<Matrix> coef;  // lag 1 first
    SymMatrix residual_cov;
};

/// Equation-by-equation OLS on [1, y_{i-1}, ..., y_{i-k}]. Residual
/// covariance uses denominator T - k.
VarModel fit_var(const Matrix& data, int order);

/// Gaussian VAR BIC: log det(residual_cov) + (log T_eff / T_eff) * n_params,
/// with T_eff = T - k and n_params = dim * (1 + dim * k). Lower is better.
double bic(const VarModel& model, const Matrix& data);

/// Order in 1..max_order minimizing BIC; ties (within 1e-12) go to the
/// smaller order.
std::pair<int, VarModel> select_order(const Matrix& data, int max_order);

/// One-step-ahead point forecast from the last `order` rows, newest last.
Vector forecast_var(const VarModel& model, const Matrix& recent);

/// Per-day Nelson-Siegel level/slope/curvature at a shared decay rate.
struct NsFactorSeries {
    std::vector<Date> dates;
    Matrix factors;  // T x 3: (beta1, beta2, beta3)
    double lambda = 0.0;
};

/// Diebold-Li-style default grid, 0.030..0.120 per month in steps of 0.005.
std::vector<double> default_lambda_grid();

/// Per-day OLS with the Nelson-Siegel basis; the shared lambda is the grid
/// value minimizing the total squared error across all days.
NsFactorSeries extract_ns_factors(const YieldSeries& series,
                                  const std::vector<double>& lambda_grid);

/// Forecast factors one step with a BIC-selected VAR, then map through the
/// Nelson-Siegel loadings on the grid.
Vector forecast_dns(const NsFactorSeries& factors, const TermGrid& grid, int max_order);

}  // namespace yieldcast
