#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "yieldcast/basis.hpp"

using namespace yieldcast;

namespace {

YieldCurve make_curve(const Vector& y) {
    return YieldCurve(Date{2006, 2, 6}, y, TermGrid::treasury());
}

// A gently humped fixture curve.
Vector fixture_yields() {
    Vector y(11);
    y << 4.43, 4.47, 4.53, 4.68, 4.76, 4.82, 4.85, 4.82, 4.76, 4.73, 4.72;
    return y;
}

}  // namespace

TEST_CASE("nelson-siegel design: analytic tau->0 limit and frozen value") {
    const NelsonSiegelBasis ns{0.0609};
    const double tiny = 1e-12;
    const double taus[] = {tiny, 120.0};
    const Matrix x = design_matrix(BasisSpec{ns}, taus);
    CHECK(x(0, 0) == 1.0);
    CHECK(x(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x(0, 2) == doctest::Approx(0.0));
    // high-precision direct evaluation of f1, f2 at lambda=0.0609, tau=120
    CHECK(x(1, 1) == doctest::Approx(0.1367446420327446).epsilon(1e-13));
    CHECK(x(1, 2) == doctest::Approx(0.1360744860080424).epsilon(1e-13));
}

TEST_CASE("fourier design at tau=0 is (1, 0, 1, 0, 1, ...)") {
    const double zero = 0.0;
    const Matrix x = design_matrix(BasisSpec{FourierBasis{24.0, 2}}, {&zero, 1});
    REQUIRE(x.cols() == 5);
    CHECK(x(0, 0) == 1.0);
    CHECK(x(0, 1) == 0.0);
    CHECK(x(0, 2) == 1.0);
    CHECK(x(0, 3) == 0.0);
    CHECK(x(0, 4) == 1.0);
}

TEST_CASE("nelson-siegel loadings: f1 strictly decreasing, f2 nonnegative") {
    const NelsonSiegelBasis ns{0.05};
    std::vector<double> taus;
    for (int i = 1; i <= 720; ++i) taus.push_back(0.5 * i);
    const Matrix x = design_matrix(BasisSpec{ns}, taus);
    for (Eigen::Index i = 1; i < x.rows(); ++i)
        CHECK(x(i, 1) < x(i - 1, 1));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        CHECK(x(i, 2) >= 0.0);
    // f2 -> 0 as tau -> 0+
    const double eps = 1e-9;
    const Matrix near_zero = design_matrix(BasisSpec{ns}, {&eps, 1});
    CHECK(std::abs(near_zero(0, 2)) < 1e-6);
}

TEST_CASE("fit_ols recovers exact nelson-siegel coefficients") {
    const BasisSpec spec = NelsonSiegelBasis{0.5};
    Vector beta(3);
    beta << 3.0, -1.0, 0.5;
    const Vector y = design_matrix(spec, TermGrid::treasury()) * beta;
    const BasisFit fit = fit_ols(spec, TermGrid::treasury(), make_curve(y));
    CHECK((fit.coefficients - beta).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(fit.penalty_lambda == 0.0);
}

TEST_CASE("fit_ols constant curve loads only the level") {
    const BasisSpec spec = NelsonSiegelBasis{0.0609};
    const Vector y = Vector::Constant(11, 4.0);
    const BasisFit fit = fit_ols(spec, TermGrid::treasury(), make_curve(y));
    // verify against the independently solved normal equations
    const Matrix x = design_matrix(spec, TermGrid::treasury());
    const Vector ref = oracles::gauss_solve(x.transpose() * x, x.transpose() * y);
    CHECK((fit.coefficients - ref).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(fit.coefficients[0] == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(std::abs(fit.coefficients[1]) < 1e-8);
    CHECK(std::abs(fit.coefficients[2]) < 1e-8);
}

TEST_CASE("square fourier system interpolates all 11 points") {
    // 11 functions on 11 equally spaced points over one period: the design is
    // orthogonal and the square system interpolates exactly.
    const BasisSpec spec = FourierBasis{22.0, 5};
    std::vector<double> taus;
    for (int i = 0; i < 11; ++i) taus.push_back(2.0 * i);
    const Vector y = fixture_yields();
    const BasisFit fit = fit_ols(spec, taus, y);
    const Vector fitted = evaluate(fit, taus);
    CHECK((fitted - y).squaredNorm() < 1e-16);
}

TEST_CASE("penalty matrix: constant row is zero, symmetric PSD") {
    const BasisSpec spec = FourierBasis{24.0, 2};
    const SymMatrix r2 = penalty_matrix_r2(spec, 0.0, 24.0);
    for (Eigen::Index j = 0; j < r2.order(); ++j) {
        CHECK(r2(0, j) == 0.0);
        CHECK(r2(j, 0) == 0.0);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(r2.mat(), Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("penalty matrix: fourier diagonal matches omega^4 P/2, cross term zero") {
    const double P = 24.0;
    const BasisSpec spec = FourierBasis{P, 1};
    const SymMatrix r2 = penalty_matrix_r2(spec, 0.0, P);
    // closed form for sin(omega t): integral of omega^4 sin^2 over one period
    CHECK(r2(1, 1) == doctest::Approx(0.056371001755788447).epsilon(1e-9));
    CHECK(r2(2, 2) == doctest::Approx(0.056371001755788447).epsilon(1e-9));
    // sin/cos cross term vanishes over the full period
    CHECK(std::abs(r2(1, 2)) < 1e-12);
}

TEST_CASE("penalty matrix: nelson-siegel second derivatives match quadrature "
          "of a high-accuracy finite difference") {
    // The closed forms are cross-checked against central differences of the
    // design matrix itself at interior points.
    const BasisSpec spec = NelsonSiegelBasis{0.07};
    std::vector<double> taus = {5.0, 30.0, 100.0, 250.0};
    const Matrix dd = second_derivative_matrix(spec, taus);
    const double h = 1e-3;
    for (size_t i = 0; i < taus.size(); ++i) {
        const double pts[] = {taus[i] - h, taus[i], taus[i] + h};
        const Matrix x = design_matrix(spec, pts);
        for (int col = 0; col < 3; ++col) {
            const double fd = (x(0, col) - 2.0 * x(1, col) + x(2, col)) / (h * h);
            CHECK(dd(static_cast<Eigen::Index>(i), col) ==
                  doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("fit_penalized at lambda=0 coincides with OLS") {
    const BasisSpec spec = FourierBasis{720.0, 3};
    const Vector y = fixture_yields();
    const BasisFit ols = fit_ols(spec, TermGrid::treasury(), make_curve(y));
    const BasisFit pen = fit_penalized(spec, TermGrid::treasury(), make_curve(y), 0.0);
    CHECK((ols.coefficients - pen.coefficients).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fit_penalized large lambda flattens non-constant coefficients") {
    const BasisSpec spec = FourierBasis{720.0, 3};
    const Vector y = fixture_yields();
    const BasisFit fit = fit_penalized(spec, TermGrid::treasury(), make_curve(y), 1e12);
    for (Eigen::Index i = 1; i < fit.coefficients.size(); ++i)
        CHECK(std::abs(fit.coefficients[i]) < 1e-3);
    CHECK(fit.coefficients[0] == doctest::Approx(y.mean()).epsilon(0.02));
}

TEST_CASE("penalized SSE sits between OLS SSE and constant-fit SSE") {
    const BasisSpec spec = FourierBasis{720.0, 3};
    const Vector y = fixture_yields();
    const auto& grid = TermGrid::treasury();
    auto sse = [&](const BasisFit& fit) {
        return (evaluate(fit, grid.terms()) - y).squaredNorm();
    };
    const double sse_ols = sse(fit_ols(spec, grid, make_curve(y)));
    const double sse_const = (y.array() - y.mean()).matrix().squaredNorm();
    const double sse_pen = sse(fit_penalized(spec, grid, make_curve(y), 100.0));
    CHECK(sse_pen >= sse_ols - 1e-12);
    CHECK(sse_pen <= sse_const + 1e-12);
}

TEST_CASE("curvature energy is non-increasing in lambda") {
    const BasisSpec spec = FourierBasis{720.0, 3};
    const Vector y = fixture_yields();
    const double lambdas[] = {0.0, 1.0, 1e2, 1e4, 1e6};
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : lambdas) {
        const BasisFit fit =
            fit_penalized(spec, TermGrid::treasury(), make_curve(y), lambda);
        const double energy = curvature_energy(fit, 1.0, 360.0);
        CHECK(energy <= prev + 1e-10);
        prev = energy;
    }
}

TEST_CASE("evaluate: level-only nelson-siegel curve is flat") {
    BasisFit fit{NelsonSiegelBasis{0.1}, Vector(3), 0.0};
    fit.coefficients << 4.2, 0.0, 0.0;
    const double taus[] = {1.0, 17.0, 333.0};
    const Vector v = evaluate(fit, taus);
    for (Eigen::Index i = 0; i < v.size(); ++i)
        CHECK(v[i] == doctest::Approx(4.2));
}

TEST_CASE("evaluate at held-out points matches the oracle product") {
    const BasisSpec spec = NelsonSiegelBasis{0.08};
    const BasisFit fit = fit_ols(spec, TermGrid::treasury(), make_curve(fixture_yields()));
    const double held_out[] = {18.0, 48.0, 300.0};
    const Vector got = evaluate(fit, held_out);
    const Matrix x = design_matrix(spec, held_out);
    for (Eigen::Index i = 0; i < got.size(); ++i) {
        double dot = 0.0;
        for (Eigen::Index j = 0; j < x.cols(); ++j) dot += x(i, j) * fit.coefficients[j];
        CHECK(got[i] == doctest::Approx(dot).epsilon(1e-12));
    }
}

TEST_CASE("gaussian and exponential bases build and differentiate") {
    const BasisSpec gauss = GaussianRbfBasis{{12.0, 120.0}, 1e-4};
    const BasisSpec expo = ExponentialBasis{{-0.02, -0.005}};
    const auto& grid = TermGrid::treasury();
    CHECK(design_matrix(gauss, grid).cols() == 3);
    CHECK(design_matrix(expo, grid).cols() == 3);
    CHECK_NOTHROW(penalty_matrix_r2(gauss, 1.0, 360.0));
    CHECK_NOTHROW(penalty_matrix_r2(expo, 1.0, 360.0));
    // overflowing rates surface as an error, not as Inf entries
    const BasisSpec blowup = ExponentialBasis{{10.0}};
    CHECK_THROWS_AS(design_matrix(blowup, grid), Error);
    CHECK_THROWS_AS(validate(BasisSpec{NelsonSiegelBasis{-1.0}}), Error);
}
