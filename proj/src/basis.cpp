#include "yieldcast/basis.hpp"

#include <algorithm>
#include <cmath>

namespace yieldcast {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Nelson-Siegel slope loading f1(u) = (1 - e^{-u})/u with u = lambda*tau.
double ns_f1(double u) {
    if (u < 1e-8) return 1.0;
    return -std::expm1(-u) / u;
}

// d^2/du^2 of f1. Series below u = 0.2 where the closed form cancels badly.
double ns_f1_dd(double u) {
    if (u < 0.2) {
        // sum_{n>=2} (-1)^n n(n-1) u^{n-2} / (n+1)!
        double sum = 0.0, fact = 2.0;  // (n+1)! starting at n=2 -> 3! built up below
        double upow = 1.0;
        for (int n = 2; n <= 12; ++n) {
            fact *= (n + 1);  // after the loop body for n, fact == (n+1)!
            const double term = ((n % 2 == 0) ? 1.0 : -1.0) * n * (n - 1) * upow / fact;
            sum += term;
            upow *= u;
        }
        return sum;
    }
    const double e = std::exp(-u);
    return -e * (u + 2.0) / (u * u) + 2.0 * (1.0 - e) / (u * u * u);
}

struct DesignBuilder {
    std::span<const double> taus;
    bool second_derivative;

    Matrix operator()(const FourierBasis& b) const {
        const auto m = static_cast<Eigen::Index>(taus.size());
        const double omega = kTwoPi / b.period;
        Matrix out(m, 1 + 2 * b.n_pairs);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double t = taus[static_cast<size_t>(i)];
            out(i, 0) = second_derivative ? 0.0 : 1.0;
            for (int k = 1; k <= b.n_pairs; ++k) {
                const double w = k * omega;
                const double scale = second_derivative ? -w * w : 1.0;
                out(i, 2 * k - 1) = scale * std::sin(w * t);
                out(i, 2 * k) = scale * std::cos(w * t);
            }
        }
        return out;
    }

    Matrix operator()(const NelsonSiegelBasis& b) const {
        const auto m = static_cast<Eigen::Index>(taus.size());
        const double L = b.lambda;
        Matrix out(m, 3);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double u = L * taus[static_cast<size_t>(i)];
            if (second_derivative) {
                const double f1dd = L * L * ns_f1_dd(u);
                out(i, 0) = 0.0;
                out(i, 1) = f1dd;
                out(i, 2) = f1dd - L * L * std::exp(-u);
            } else {
                const double f1 = ns_f1(u);
                out(i, 0) = 1.0;
                out(i, 1) = f1;
                out(i, 2) = u < 1e-8 ? 0.0 : f1 - std::exp(-u);
            }
        }
        return out;
    }

    Matrix operator()(const ExponentialBasis& b) const {
        const auto m = static_cast<Eigen::Index>(taus.size());
        const auto k = static_cast<Eigen::Index>(b.rates.size());
        Matrix out(m, 1 + k);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double t = taus[static_cast<size_t>(i)];
            out(i, 0) = second_derivative ? 0.0 : 1.0;
            for (Eigen::Index j = 0; j < k; ++j) {
                const double r = b.rates[static_cast<size_t>(j)];
                const double scale = second_derivative ? r * r : 1.0;
                out(i, 1 + j) = scale * std::exp(r * t);
            }
        }
        return out;
    }

    Matrix operator()(const GaussianRbfBasis& b) const {
        const auto m = static_cast<Eigen::Index>(taus.size());
        const auto k = static_cast<Eigen::Index>(b.centers.size());
        const double L = b.lambda;
        Matrix out(m, 1 + k);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double t = taus[static_cast<size_t>(i)];
            out(i, 0) = second_derivative ? 0.0 : 1.0;
            for (Eigen::Index j = 0; j < k; ++j) {
                const double d = t - b.centers[static_cast<size_t>(j)];
                const double g = std::exp(-L * d * d);
                out(i, 1 + j) =
                    second_derivative ? g * (4.0 * L * L * d * d - 2.0 * L) : g;
            }
        }
        return out;
    }
};

}  // namespace

int basis_size(const BasisSpec& spec) {
    return std::visit(
        [](const auto& b) -> int {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, FourierBasis>)
                return 1 + 2 * b.n_pairs;
            else if constexpr (std::is_same_v<T, NelsonSiegelBasis>)
                return 3;
            else if constexpr (std::is_same_v<T, ExponentialBasis>)
                return 1 + static_cast<int>(b.rates.size());
            else
                return 1 + static_cast<int>(b.centers.size());
        },
        spec);
}

std::string basis_name(const BasisSpec& spec) {
    return std::visit(
        [](const auto& b) -> std::string {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, FourierBasis>)
                return "fourier";
            else if constexpr (std::is_same_v<T, NelsonSiegelBasis>)
                return "nelson-siegel";
            else if constexpr (std::is_same_v<T, ExponentialBasis>)
                return "exponential";
            else
                return "gaussian";
        },
        spec);
}

void validate(const BasisSpec& spec) {
    std::visit(
        [](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, FourierBasis>) {
                if (!(b.period > 0.0) || b.n_pairs < 1)
                    throw Error("fourier basis: requires period > 0 and n_pairs >= 1");
            } else if constexpr (std::is_same_v<T, NelsonSiegelBasis>) {
                if (!(b.lambda > 0.0))
                    throw Error("nelson-siegel basis: requires lambda > 0");
            } else if constexpr (std::is_same_v<T, ExponentialBasis>) {
                if (b.rates.empty()) throw Error("exponential basis: no rates given");
            } else {
                if (!(b.lambda > 0.0) || b.centers.empty())
                    throw Error("gaussian basis: requires centers and lambda > 0");
            }
        },
        spec);
}

Matrix design_matrix(const BasisSpec& spec, std::span<const double> taus) {
    validate(spec);
    if (taus.empty()) throw Error("design_matrix: no evaluation points");
    Matrix out = std::visit(DesignBuilder{taus, false}, spec);
    if (!out.allFinite())
        throw Error("design_matrix: non-finite entries (basis parameters overflow "
                    "on this term range)");
    return out;
}

Matrix design_matrix(const BasisSpec& spec, const TermGrid& grid) {
    return design_matrix(spec, std::span<const double>(grid.terms()));
}

Matrix second_derivative_matrix(const BasisSpec& spec, std::span<const double> taus) {
    validate(spec);
    if (taus.empty()) throw Error("second_derivative_matrix: no evaluation points");
    return std::visit(DesignBuilder{taus, true}, spec);
}

SymMatrix penalty_matrix_r2(const BasisSpec& spec, double lo, double hi, int n_panels) {
    if (!(lo < hi)) throw Error("penalty_matrix_r2: requires lo < hi");
    if (n_panels <= 0 || n_panels % 2 != 0)
        throw Error("penalty_matrix_r2: n_panels must be even and positive");
    const double h = (hi - lo) / n_panels;

    std::vector<double> nodes(static_cast<size_t>(n_panels) + 1);
    for (int i = 0; i <= n_panels; ++i) nodes[static_cast<size_t>(i)] = lo + i * h;
    const Matrix g = second_derivative_matrix(spec, nodes);
    if (!g.allFinite())
        throw Error("penalty_matrix_r2: non-finite second derivatives");

    Vector w(n_panels + 1);
    w[0] = w[n_panels] = 1.0;
    for (int i = 1; i < n_panels; ++i) w[i] = i % 2 == 1 ? 4.0 : 2.0;
    w *= h / 3.0;

    Matrix r2 = g.transpose() * w.asDiagonal() * g;
    r2 = 0.5 * (r2 + r2.transpose().eval());
    return SymMatrix(std::move(r2));
}

BasisFit fit_ols(const BasisSpec& spec, std::span<const double> taus, const Vector& y) {
    const Matrix x = design_matrix(spec, taus);
    if (x.rows() < x.cols())
        throw Error("fit_ols: fewer observations than basis functions");
    return {spec, ols_solve(x, y), 0.0};
}

BasisFit fit_ols(const BasisSpec& spec, const TermGrid& grid, const YieldCurve& curve) {
    return fit_ols(spec, std::span<const double>(grid.terms()), curve.yields);
}

BasisFit fit_penalized(const BasisSpec& spec, std::span<const double> taus,
                       const Vector& y, double lambda) {
    if (lambda < 0.0) throw Error("fit_penalized: lambda must be nonnegative");
    const Matrix x = design_matrix(spec, taus);
    if (x.rows() != y.size())
        throw DimensionMismatch("fit_penalized: y does not match taus");

    Matrix lhs = x.transpose() * x;
    lhs = 0.5 * (lhs + lhs.transpose().eval());
    if (lambda > 0.0) {
        const auto [lo, hi] = std::minmax_element(taus.begin(), taus.end());
        lhs += lambda * penalty_matrix_r2(spec, *lo, *hi).mat();
    }
    const Vector rhs = x.transpose() * y;
    try {
        Vector beta = cholesky_spd_auto(SymMatrix(std::move(lhs))).solve(rhs);
        return {spec, std::move(beta), lambda};
    } catch (const NotPositiveDefinite&) {
        throw RankDeficient("fit_penalized: penalized normal equations not "
                            "positive definite after escalation");
    }
}

BasisFit fit_penalized(const BasisSpec& spec, const TermGrid& grid,
                       const YieldCurve& curve, double lambda) {
    return fit_penalized(spec, std::span<const double>(grid.terms()), curve.yields,
                         lambda);
}

Vector evaluate(const BasisFit& fit, std::span<const double> taus) {
    return design_matrix(fit.spec, taus) * fit.coefficients;
}

double curvature_energy(const BasisFit& fit, double lo, double hi) {
    const SymMatrix r2 = penalty_matrix_r2(fit.spec, lo, hi);
    return fit.coefficients.dot(r2.mat() * fit.coefficients);
}

}  // namespace yieldcast
