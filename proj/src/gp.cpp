#include "yieldcast/gp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace yieldcast {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

SymMatrix noisy_kernel(const KernelParams& params, std::span<const double> taus) {
    Matrix k = kernel_matrix(params, taus, taus);
    k.diagonal().array() += params.noise_sigma * params.noise_sigma;
    return SymMatrix(std::move(k));
}

}  // namespace

void KernelParams::validate() const {
    const double vals[] = {rbf_variance, rbf_lengthscale, linear_variance, noise_sigma};
    for (double v : vals)
        if (!(v > 0.0) || !std::isfinite(v))
            throw Error("KernelParams: all hyperparameters must be positive and finite");
}

Vector KernelParams::to_log() const {
    validate();
    Vector x(4);
    x << std::log(rbf_variance), std::log(rbf_lengthscale), std::log(linear_variance),
        std::log(noise_sigma);
    return x;
}

KernelParams KernelParams::from_log(const Vector& x) {
    if (x.size() != 4) throw DimensionMismatch("KernelParams::from_log: need 4 entries");
    return {std::exp(x[0]), std::exp(x[1]), std::exp(x[2]), std::exp(x[3])};
}

double kernel(const KernelParams& params, double tau_a, double tau_b) {
    const double xa = tau_a / 12.0;
    const double xb = tau_b / 12.0;
    const double d = xa - xb;
    const double l2 = params.rbf_lengthscale * params.rbf_lengthscale;
    return params.rbf_variance * std::exp(-0.5 * d * d / l2) +
           params.linear_variance * xa * xb;
}

Matrix kernel_matrix(const KernelParams& params, std::span<const double> taus_a,
                     std::span<const double> taus_b) {
    params.validate();
    const auto rows = static_cast<Eigen::Index>(taus_a.size());
    const auto cols = static_cast<Eigen::Index>(taus_b.size());
    Matrix k(rows, cols);
    const bool same = taus_a.data() == taus_b.data() && taus_a.size() == taus_b.size();
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Eigen::Index j0 = same ? i : 0;
        for (Eigen::Index j = j0; j < cols; ++j) {
            k(i, j) = kernel(params, taus_a[static_cast<size_t>(i)],
                             taus_b[static_cast<size_t>(j)]);
            if (same && j != i) k(j, i) = k(i, j);
        }
    }
    return k;
}

double log_marginal_likelihood(const KernelParams& params,
                               std::span<const double> taus, const Vector& y,
                               const Vector& mean_at_taus) {
    const auto m = static_cast<Eigen::Index>(taus.size());
    if (y.size() != m || mean_at_taus.size() != m)
        throw DimensionMismatch("log_marginal_likelihood: size mismatch");
    const SpdFactor factor = cholesky_spd_auto(noisy_kernel(params, taus));
    const Vector r = y - mean_at_taus;
    const Vector alpha = factor.solve(r);
    return -0.5 * r.dot(alpha) - 0.5 * factor.log_det() - 0.5 * m * kLog2Pi;
}

KernelParams default_init(std::span<const double> taus, const Vector& y) {
    const double n = static_cast<double>(y.size());
    const double mean = y.mean();
    double var = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) var += (y[i] - mean) * (y[i] - mean);
    var = n > 1 ? var / (n - 1) : 0.0;
    var = std::max(var, 1e-4);  // keeps degenerate (constant) curves fittable

    double max_years = 0.0;
    for (double t : taus) max_years = std::max(max_years, t / 12.0);
    max_years = std::max(max_years, 1.0);

    KernelParams p;
    p.rbf_variance = var;
    p.rbf_lengthscale = 2.0;
    p.linear_variance = 0.1 * var / (max_years * max_years);
    p.noise_sigma = std::max(0.1 * std::sqrt(var), 1e-3);
    return p;
}

KernelParams fit_hyperparams(std::span<const double> taus, const Vector& y,
                             const Vector& mean_at_taus, const KernelParams& init,
                             const FitOptions& options) {
    init.validate();
    const double init_lml = log_marginal_likelihood(init, taus, y, mean_at_taus);
    if (!std::isfinite(init_lml))
        throw NonFiniteObjective("fit_hyperparams: marginal likelihood not finite at init");

    auto objective = [&](const Vector& x) -> double {
        try {
            return -log_marginal_likelihood(KernelParams::from_log(x), taus, y,
                                            mean_at_taus);
        } catch (const NotPositiveDefinite&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    BoxBounds bounds{Vector::Constant(4, std::log(kParamLowerBound)),
                     Vector::Constant(4, std::log(kParamUpperBound))};

    const Vector x0 = init.to_log();
    std::vector<Vector> starts{x0};
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> noise(-0.1, 0.1);
    const double scales[] = {std::log(10.0), std::log(0.1)};
    for (int s = 1; s < options.n_starts; ++s) {
        Vector xs = x0;
        const double shift = scales[(s - 1) % 2];
        for (Eigen::Index i = 0; i < xs.size(); ++i) xs[i] += shift + noise(rng);
        starts.push_back(std::move(xs));
    }

    Vector best_x = bounds.clamp(x0);
    double best_f = objective(best_x);
    for (const Vector& start : starts) {
        const MinimizeResult res = minimize(objective, start, bounds, options.optim);
        if (res.value < best_f) {
            best_f = res.value;
            best_x = res.argmin;
        }
    }
    return KernelParams::from_log(best_x);
}

GpPosterior posterior(const KernelParams& params, std::span<const double> taus,
                      const Vector& y, const Vector& mean_at_taus,
                      std::span<const double> test_taus, const Vector& mean_at_test) {
    const auto m = static_cast<Eigen::Index>(taus.size());
    const auto p = static_cast<Eigen::Index>(test_taus.size());
    if (y.size() != m || mean_at_taus.size() != m || mean_at_test.size() != p)
        throw DimensionMismatch("posterior: size mismatch");

    const SpdFactor factor = cholesky_spd_auto(noisy_kernel(params, taus));
    const Matrix k_cross = kernel_matrix(params, taus, test_taus);  // m x p
    const Matrix k_test = kernel_matrix(params, test_taus, test_taus);

    const Vector alpha = factor.solve(y - mean_at_taus);
    Vector mean = mean_at_test + k_cross.transpose() * alpha;

    Matrix cov = k_test - k_cross.transpose() * factor.solve(k_cross);
    cov = 0.5 * (cov + cov.transpose().eval());
    for (Eigen::Index i = 0; i < p; ++i) {
        if (cov(i, i) < -1e-10)
            throw NotPositiveDefinite("posterior: variance below -1e-10 at test point " +
                                      std::to_string(i));
        if (cov(i, i) < 0.0) cov(i, i) = 0.0;
    }

    return {std::vector<double>(taus.begin(), taus.end()),
            std::vector<double>(test_taus.begin(), test_taus.end()),
            mean_at_taus,
            std::move(mean),
            SymMatrix(std::move(cov)),
            params};
}

Interval predictive_interval(const GpPosterior& post, double coverage) {
    if (!(coverage > 0.0 && coverage < 1.0))
        throw Error("predictive_interval: coverage must lie in (0, 1)");
    const double z = normal_quantile(0.5 + 0.5 * coverage);
    const double noise_var = post.params.noise_sigma * post.params.noise_sigma;
    const auto p = post.posterior_mean.size();
    Interval iv{Vector(p), Vector(p)};
    for (Eigen::Index i = 0; i < p; ++i) {
        const double sd = std::sqrt(std::max(post.posterior_cov(i, i), 0.0) + noise_var);
        iv.lo[i] = post.posterior_mean[i] - z * sd;
        iv.hi[i] = post.posterior_mean[i] + z * sd;
    }
    return iv;
}

}  // namespace yieldcast
