#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>

#include "yieldcast/errors.hpp"

namespace yieldcast {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

/// Symmetric matrix validated at construction.
///
/// Construction rejects non-square, non-finite, or asymmetric (beyond 1e-12
/// absolute) input, then stores the exactly symmetrized matrix so downstream
/// factorizations never see roundoff asymmetry.
class SymMatrix {
public:
    SymMatrix() : mat_(0, 0) {}
    explicit SymMatrix(Matrix m);

    static SymMatrix identity(Eigen::Index n);

    Eigen::Index order() const { return mat_.rows(); }
    const Matrix& mat() const { return mat_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return mat_(i, j); }

    /// Mean of the diagonal, the scale used by the jitter escalation ladder.
    double mean_diag() const;

private:
    Matrix mat_;
};

/// Lower-triangular Cholesky factor of a + jitter*I.
class SpdFactor {
public:
    SpdFactor(Eigen::LLT<Matrix> llt, double jitter);

    Matrix lower() const { return llt_.matrixL(); }
    double jitter() const { return jitter_; }

    template <typename Derived>
    auto solve(const Eigen::MatrixBase<Derived>& b) const {
        return llt_.solve(b.derived()).eval();
    }

    /// log det(a + jitter*I) from the factor diagonal.
    double log_det() const;

private:
    Eigen::LLT<Matrix> llt_;
    double jitter_;
};

/// Single factorization attempt of a + jitter*I. Throws NotPositiveDefinite
/// on failure; callers wanting the escalation ladder use cholesky_spd_auto.
SpdFactor cholesky_spd(const SymMatrix& a, double jitter);

/// Factorization with the jitter escalation ladder
/// {0, 1e-10, 1e-8, 1e-6} * mean(diag(a)); throws NotPositiveDefinite only
/// after every rung fails.
SpdFactor cholesky_spd_auto(const SymMatrix& a);

/// Solve (a + jitter*I) x = b via the Cholesky factor.
Vector spd_solve(const SymMatrix& a, const Vector& b, double jitter);

/// Least squares via the normal equations with the jitter ladder.
/// Throws RankDeficient when the Gram matrix cannot be factorized.
Vector ols_solve(const Matrix& design, const Vector& y);

struct OptimConfig {
    int max_evals = 2000;
    double tol = 1e-6;  // simplex diameter (inf-norm) at termination
};

struct BoxBounds {
    Vector lo;
    Vector hi;

    static BoxBounds unbounded(Eigen::Index n);
    Vector clamp(Vector x) const;
};

struct MinimizeResult {
    Vector argmin;
    double value = std::numeric_limits<double>::quiet_NaN();
    int evals = 0;
};

/// Derivative-free Nelder-Mead simplex minimization with box bounds
/// (probe points are clamped into the box). Non-finite objective values at
/// probed points are treated as +inf; a non-finite value at init throws
/// NonFiniteObjective. The returned value never exceeds objective(init).
MinimizeResult minimize(const std::function<double(const Vector&)>& objective,
                        const Vector& init, const BoxBounds& bounds,
                        const OptimConfig& config = {});

/// Composite Simpson rule over n_panels (even) subintervals.
double simpson_quadrature(const std::function<double(double)>& f, double lo,
                          double hi, int n_panels);

/// Inverse standard normal CDF, accurate to ~1e-13 after Halley refinement.
double normal_quantile(double p);

}  // namespace yieldcast
