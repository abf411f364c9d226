#include "yieldcast/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace yieldcast {

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const Matrix& m) { return m.allFinite(); }

SymMatrix::SymMatrix(Matrix m) {
    if (m.rows() != m.cols())
        throw DimensionMismatch("SymMatrix: input is not square");
    if (m.size() == 0) {
        mat_ = std::move(m);
        return;
    }
    if (!m.allFinite())
        throw Error("SymMatrix: non-finite entries");
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12)
        throw Error("SymMatrix: asymmetry " + std::to_string(asym) + " exceeds 1e-12");
    mat_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index n) {
    return SymMatrix(Matrix::Identity(n, n));
}

double SymMatrix::mean_diag() const {
    return mat_.diagonal().mean();
}

SpdFactor::SpdFactor(Eigen::LLT<Matrix> llt, double jitter)
    : llt_(std::move(llt)), jitter_(jitter) {}

double SpdFactor::log_det() const {
    return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

SpdFactor cholesky_spd(const SymMatrix& a, double jitter) {
    if (jitter < 0.0)
        throw Error("cholesky_spd: negative jitter");
    Matrix work = a.mat();
    work.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(work);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("cholesky_spd: factorization failed at jitter " +
                                  std::to_string(jitter));
    return SpdFactor(std::move(llt), jitter);
}

SpdFactor cholesky_spd_auto(const SymMatrix& a) {
    const double scale = a.mean_diag();
    const double rungs[] = {0.0, 1e-10, 1e-8, 1e-6};
    for (double r : rungs) {
        try {
            return cholesky_spd(a, r * scale);
        } catch (const NotPositiveDefinite&) {
            // climb to the next rung
        }
    }
    throw NotPositiveDefinite("cholesky_spd_auto: jitter ladder exhausted");
}

Vector spd_solve(const SymMatrix& a, const Vector& b, double jitter) {
    if (a.order() != b.size())
        throw DimensionMismatch("spd_solve: dimension mismatch");
    return cholesky_spd(a, jitter).solve(b);
}

Vector ols_solve(const Matrix& design, const Vector& y) {
    if (design.rows() != y.size())
        throw DimensionMismatch("ols_solve: row count does not match y");
    if (design.rows() < design.cols())
        throw Error("ols_solve: underdetermined system");
    Matrix gram = design.transpose() * design;
    gram = 0.5 * (gram + gram.transpose().eval());
    const Vector rhs = design.transpose() * y;
    try {
        return cholesky_spd_auto(SymMatrix(std::move(gram))).solve(rhs);
    } catch (const NotPositiveDefinite&) {
        throw RankDeficient("ols_solve: Gram matrix not positive definite after escalation");
    }
}

BoxBounds BoxBounds::unbounded(Eigen::Index n) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {Vector::Constant(n, -inf), Vector::Constant(n, inf)};
}

Vector BoxBounds::clamp(Vector x) const {
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x[i] = std::min(std::max(x[i], lo[i]), hi[i]);
    return x;
}

namespace {

struct Vertex {
    Vector x;
    double f;
};

double simplex_diameter(const std::vector<Vertex>& simplex) {
    double d = 0.0;
    for (size_t i = 1; i < simplex.size(); ++i)
        d = std::max(d, (simplex[i].x - simplex[0].x).cwiseAbs().maxCoeff());
    return d;
}

}  // namespace

MinimizeResult minimize(const std::function<double(const Vector&)>& objective,
                        const Vector& init, const BoxBounds& bounds,
                        const OptimConfig& config) {
    const Eigen::Index n = init.size();
    if (n == 0)
        throw Error("minimize: empty initial point");
    if (bounds.lo.size() != n || bounds.hi.size() != n)
        throw DimensionMismatch("minimize: bounds dimension mismatch");

    int evals = 0;
    auto eval = [&](const Vector& x) {
        ++evals;
        const double f = objective(x);
        return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
    };

    const Vector x0 = bounds.clamp(init);
    const double f0 = eval(x0);
    if (!std::isfinite(f0))
        throw NonFiniteObjective("minimize: objective not finite at init");

    // Initial simplex: 5% steps along each axis, 0.1 for zero coordinates.
    std::vector<Vertex> simplex;
    simplex.push_back({x0, f0});
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = x0[i] != 0.0 ? 0.05 * std::abs(x0[i]) : 0.1;
        Vector xi = x0;
        xi[i] += h;
        xi = bounds.clamp(xi);
        if ((xi - x0).cwiseAbs().maxCoeff() == 0.0) {
            xi[i] -= h;  // step was flush against the upper bound
            xi = bounds.clamp(xi);
        }
        simplex.push_back({xi, eval(xi)});
    }

    constexpr double alpha = 1.0;  // reflection
    constexpr double gamma = 2.0;  // expansion
    constexpr double rho = 0.5;    // contraction
    constexpr double sigma = 0.5;  // shrink

    auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
    std::sort(simplex.begin(), simplex.end(), by_value);

    while (evals < config.max_evals && simplex_diameter(simplex) >= config.tol) {
        const Vertex& best = simplex.front();
        Vertex& worst = simplex.back();
        const double f_second_worst = simplex[simplex.size() - 2].f;

        Vector centroid = Vector::Zero(n);
        for (size_t i = 0; i + 1 < simplex.size(); ++i) centroid += simplex[i].x;
        centroid /= static_cast<double>(n);

        const Vector xr = bounds.clamp(centroid + alpha * (centroid - worst.x));
        const double fr = eval(xr);

        if (fr < best.f) {
            const Vector xe = bounds.clamp(centroid + gamma * (xr - centroid));
            const double fe = eval(xe);
            worst = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
        } else if (fr < f_second_worst) {
            worst = {xr, fr};
        } else {
            const bool outside = fr < worst.f;
            const Vector base = outside ? xr : worst.x;
            const Vector xc = bounds.clamp(centroid + rho * (base - centroid));
            const double fc = eval(xc);
            if (fc < std::min(fr, worst.f)) {
                worst = {xc, fc};
            } else {
                for (size_t i = 1; i < simplex.size(); ++i) {
                    simplex[i].x = bounds.clamp(simplex[0].x +
                                                sigma * (simplex[i].x - simplex[0].x));
                    simplex[i].f = eval(simplex[i].x);
                }
            }
        }
        std::sort(simplex.begin(), simplex.end(), by_value);
        if (evals >= config.max_evals) break;
    }

    return {simplex.front().x, simplex.front().f, evals};
}

double simpson_quadrature(const std::function<double(double)>& f, double lo,
                          double hi, int n_panels) {
    if (!(lo < hi))
        throw Error("simpson_quadrature: requires lo < hi");
    if (n_panels <= 0 || n_panels % 2 != 0)
        throw Error("simpson_quadrature: n_panels must be even and positive");
    const double h = (hi - lo) / n_panels;
    double sum = f(lo) + f(hi);
    for (int i = 1; i < n_panels; ++i)
        sum += (i % 2 == 1 ? 4.0 : 2.0) * f(lo + i * h);
    return sum * h / 3.0;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw Error("normal_quantile: p must lie in (0, 1)");

    // Acklam's rational approximation.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Halley step against the exact CDF via erfc.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace yieldcast
