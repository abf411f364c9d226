#include "yieldcast/dynamic_gp.hpp"

#include <cmath>
#include <utility>

namespace yieldcast {

namespace {

FitOptions fit_options(const DgpConfig& config, int step, int n_starts) {
    FitOptions opts;
    opts.optim = config.optim;
    opts.n_starts = n_starts;
    opts.seed = config.seed + static_cast<std::uint64_t>(step);
    return opts;
}

DgpState conditioned_state(int t, const TermGrid& grid, const Vector& prior_mean,
                           const Vector& y, const KernelParams& params) {
    GpPosterior post = posterior(params, grid.terms(), y, prior_mean, grid.terms(),
                                 prior_mean);
    return {t, grid, std::move(post.posterior_mean), std::move(post.posterior_cov),
            params};
}

}  // namespace

DgpState dgp_init(const TermGrid& grid, const YieldCurve& first_curve,
                  const DgpConfig& config) {
    if (first_curve.yields.size() != static_cast<Eigen::Index>(grid.size()))
        throw GridMismatch("dgp_init: curve does not match grid");
    const Vector zero = Vector::Zero(static_cast<Eigen::Index>(grid.size()));
    const KernelParams init =
        config.init_params ? *config.init_params : default_init(grid.terms(), first_curve.yields);
    const KernelParams fitted = fit_hyperparams(grid.terms(), first_curve.yields, zero,
                                                init, fit_options(config, 0, 3));
    return conditioned_state(0, grid, zero, first_curve.yields, fitted);
}

DgpForecast dgp_predict(const DgpState& state, double coverage) {
    if (!(coverage > 0.0 && coverage < 1.0))
        throw Error("dgp_predict: coverage must lie in (0, 1)");
    const double z = normal_quantile(0.5 + 0.5 * coverage);
    const double noise_var = state.params.noise_sigma * state.params.noise_sigma;
    const auto m = state.mean.size();
    // One-step predictive for the observation is N(mean, K + sigma^2 I) with
    // K the kernel at the current hyperparameters: the same covariance the
    // per-day marginal-likelihood fit calibrates. The conditioned state
    // covariance alone would collapse after every update and cover nothing.
    DgpForecast fc{state.t + 1, state.mean, Vector(m), Vector(m)};
    for (Eigen::Index i = 0; i < m; ++i) {
        const double tau = state.grid[static_cast<size_t>(i)];
        const double prior_var = kernel(state.params, tau, tau);
        const double sd = std::sqrt(prior_var + noise_var);
        fc.interval_lo[i] = state.mean[i] - z * sd;
        fc.interval_hi[i] = state.mean[i] + z * sd;
    }
    return fc;
}

std::pair<DgpState, DgpForecast> dgp_step(const DgpState& state,
                                          const YieldCurve& observed_next, bool refit,
                                          const DgpConfig& config, int n_starts) {
    if (observed_next.yields.size() != state.mean.size())
        throw GridMismatch("dgp_step: observation does not match state grid");

    DgpForecast forecast = dgp_predict(state, config.coverage);

    KernelParams params = state.params;
    if (refit)
        params = fit_hyperparams(state.grid.terms(), observed_next.yields, state.mean,
                                 state.params,
                                 fit_options(config, state.t + 1, n_starts));

    DgpState next = conditioned_state(state.t + 1, state.grid, state.mean,
                                      observed_next.yields, params);
    return {std::move(next), std::move(forecast)};
}

std::vector<DgpForecast> run_filter(const YieldSeries& series, const DgpConfig& config) {
    if (series.size() < 2)
        throw InsufficientData("run_filter: need at least two curves");

    std::vector<DgpForecast> forecasts;
    forecasts.reserve(series.size() - 1);

    DgpState state = dgp_init(series.grid(), series[0], config);
    for (size_t t = 1; t < series.size(); ++t) {
        const int step = static_cast<int>(t);
        const bool refit = config.refit_every > 0 && step % config.refit_every == 0;
        const int n_starts =
            config.multistart_every > 0 && step % config.multistart_every == 0 ? 3 : 1;
        auto [next, forecast] = dgp_step(state, series[t], refit, config, n_starts);
        forecasts.push_back(std::move(forecast));
        state = std::move(next);
    }
    return forecasts;
}

}  // namespace yieldcast
