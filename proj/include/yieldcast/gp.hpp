#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "yieldcast/data.hpp"
#include "yieldcast/numerics.hpp"

namespace yieldcast {

/// Covariance hyperparameters for the RBF-plus-linear kernel.
///
/// Maturities are rescaled to years (tau/12) inside kernel evaluation, so
/// rbf_lengthscale is in years and linear_variance in percent^2 per year^2;
/// variances are percent^2 and noise_sigma percent. The rescaling keeps
/// lengthscale optimization well conditioned over the 1-360 month span.
struct KernelParams {
    double rbf_variance = 1.0;
    double rbf_lengthscale = 2.0;
    double linear_variance = 0.01;
    double noise_sigma = 0.1;

    void validate() const;  // throws Error unless all strictly positive, finite

    Vector to_log() const;
    static KernelParams from_log(const Vector& x);
};

/// Optimization bounds on every hyperparameter (linear scale).
constexpr double kParamLowerBound = 1e-6;
constexpr double kParamUpperBound = 1e4;

/// k(tau, tau') = rbf_variance * exp(-(x - x')^2 / (2 l^2)) +
///                linear_variance * x * x',   x = tau/12.
/// The linear part is homogeneous (no offset) for identifiability against
/// the RBF variance.
double kernel(const KernelParams& params, double tau_a, double tau_b);

Matrix kernel_matrix(const KernelParams& params, std::span<const double> taus_a,
                     std::span<const double> taus_b);

/// Log density of y ~ N(mean_at_taus, K + sigma^2 I), computed via the
/// Cholesky factor.
double log_marginal_likelihood(const KernelParams& params,
                               std::span<const double> taus, const Vector& y,
                               const Vector& mean_at_taus);

struct FitOptions {
    OptimConfig optim;      // per-start simplex budget
    int n_starts = 3;       // 1 = warm start only
    std::uint64_t seed = 42;  // perturbation noise for the extra starts
};

/// Data-driven default initialization.
KernelParams default_init(std::span<const double> taus, const Vector& y);

/// Maximize the marginal log-likelihood over log-parameters with multi-start
/// Nelder-Mead. The result never has a lower likelihood than init.
KernelParams fit_hyperparams(std::span<const double> taus, const Vector& y,
                             const Vector& mean_at_taus, const KernelParams& init,
                             const FitOptions& options = {});

struct GpPosterior {
    std::vector<double> train_taus;
    std::vector<double> test_taus;
    Vector mean_fn_at_train;
    Vector posterior_mean;   // at test_taus
    SymMatrix posterior_cov;  // at test_taus, diagonal clamped at zero
    KernelParams params;
};

/// GP conditioning: posterior mean
///   mu(t*) + K(t*,t) [K(t,t) + sigma^2 I]^{-1} (y - mu(t))
/// and covariance
///   K(t*,t*) - K(t*,t) [K(t,t) + sigma^2 I]^{-1} K(t,t*),
/// evaluated through SPD solves, never an explicit inverse.
GpPosterior posterior(const KernelParams& params, std::span<const double> taus,
                      const Vector& y, const Vector& mean_at_taus,
                      std::span<const double> test_taus, const Vector& mean_at_test);

struct Interval {
    Vector lo;
    Vector hi;
};

/// Central observation interval: mean -/+ z * sqrt(diag cov + noise^2) with
/// z the standard normal quantile for the requested coverage.
Interval predictive_interval(const GpPosterior& post, double coverage);

}  // namespace yieldcast
