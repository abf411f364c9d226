#pragma once

#include <optional>
#include <vector>

#include "yieldcast/data.hpp"
#include "yieldcast/gp.hpp"

namespace yieldcast {

struct DgpConfig {
    double coverage = 0.95;
    int refit_every = 1;        // re-estimate hyperparameters every k-th step
    int multistart_every = 50;  // full multi-start refresh cadence; warm single
                                // start otherwise
    OptimConfig optim;
    std::uint64_t seed = 42;
    std::optional<KernelParams> init_params;  // data-driven default when unset
};

/// Filter state after absorbing the observation at step t: posterior mean and
/// covariance of the latent curve on the grid, plus the current
/// hyperparameters.
struct DgpState {
    int t = 0;
    TermGrid grid;
    Vector mean;
    SymMatrix cov;
    KernelParams params;
};

/// One-step-ahead forecast, made before the target day's curve is seen.
struct DgpForecast {
    int for_step = 0;
    Vector mean;
    Vector interval_lo;
    Vector interval_hi;
};

/// t = 0: hyperparameters from the first curve against a zero prior mean,
/// then the posterior mean/covariance conditioned on that curve.
DgpState dgp_init(const TermGrid& grid, const YieldCurve& first_curve,
                  const DgpConfig& config = {});

/// Forecast for step t+1 from the current state. The state mean is the
/// one-step-ahead predictive mean (the latent curve evolves as a random
/// walk); intervals come from N(mean, cov + noise^2 I) at the configured
/// coverage.
DgpForecast dgp_predict(const DgpState& state, double coverage = 0.95);

/// One filter cycle: forecast from the current state, then absorb
/// observed_next -- re-estimating hyperparameters against the predicted mean
/// when refit is set -- and condition mean/covariance on the new curve.
/// The returned forecast was made before observed_next was seen.
std::pair<DgpState, DgpForecast> dgp_step(const DgpState& state,
                                          const YieldCurve& observed_next, bool refit,
                                          const DgpConfig& config = {},
                                          int n_starts = 1);

/// Sequential filter over the whole series: one forecast per day from the
/// second day onward; the forecast for day d depends only on curves before d.
std::vector<DgpForecast> run_filter(const YieldSeries& series, const DgpConfig& config);

}  // namespace yieldcast
