// Test-only reference implementations, algorithmically independent of the
// library paths they check: Gaussian elimination instead of Cholesky,
// explicit inverses and determinants instead of factored solves.
#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

/// Gaussian elimination with partial pivoting in long double.
inline Vector gauss_solve(const Matrix& a_in, const Vector& b_in) {
    const Eigen::Index n = a_in.rows();
    LongMatrix a = a_in.cast<long double>();
    LongVector b = b_in.cast<long double>();
    for (Eigen::Index col = 0; col < n; ++col) {
        Eigen::Index pivot = col;
        for (Eigen::Index r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (a(pivot, col) == 0.0L) throw std::runtime_error("gauss_solve: singular");
        a.row(col).swap(a.row(pivot));
        std::swap(b[col], b[pivot]);
        for (Eigen::Index r = col + 1; r < n; ++r) {
            const long double f = a(r, col) / a(col, col);
            a.row(r) -= f * a.row(col);
            b[r] -= f * b[col];
        }
    }
    LongVector x(n);
    for (Eigen::Index r = n - 1; r >= 0; --r) {
        long double s = b[r];
        for (Eigen::Index c = r + 1; c < n; ++c) s -= a(r, c) * x[c];
        x[r] = s / a(r, r);
    }
    return x.cast<double>();
}

/// Explicit inverse by Gauss-Jordan elimination in long double.
inline Matrix invert(const Matrix& a_in) {
    const Eigen::Index n = a_in.rows();
    LongMatrix a = a_in.cast<long double>();
    LongMatrix inv = LongMatrix::Identity(n, n);
    for (Eigen::Index col = 0; col < n; ++col) {
        Eigen::Index pivot = col;
        for (Eigen::Index r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (a(pivot, col) == 0.0L) throw std::runtime_error("invert: singular");
        a.row(col).swap(a.row(pivot));
        inv.row(col).swap(inv.row(pivot));
        const long double p = a(col, col);
        a.row(col) /= p;
        inv.row(col) /= p;
        for (Eigen::Index r = 0; r < n; ++r) {
            if (r == col) continue;
            const long double f = a(r, col);
            a.row(r) -= f * a.row(col);
            inv.row(r) -= f * inv.row(col);
        }
    }
    return inv.cast<double>();
}

/// log |det| via partial-pivot LU; valid for positive definite input.
inline double log_det(const Matrix& a_in) {
    const Eigen::Index n = a_in.rows();
    LongMatrix a = a_in.cast<long double>();
    long double acc = 0.0L;
    for (Eigen::Index col = 0; col < n; ++col) {
        Eigen::Index pivot = col;
        for (Eigen::Index r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (a(pivot, col) == 0.0L) throw std::runtime_error("log_det: singular");
        a.row(col).swap(a.row(pivot));
        acc += std::log(std::abs(a(col, col)));
        for (Eigen::Index r = col + 1; r < n; ++r) {
            const long double f = a(r, col) / a(col, col);
            a.row(r) -= f * a.row(col);
        }
    }
    return static_cast<double>(acc);
}

/// Multivariate normal log density via explicit inverse and determinant.
inline double mvn_logpdf(const Vector& y, const Vector& mean, const Matrix& cov) {
    const double m = static_cast<double>(y.size());
    const Vector r = y - mean;
    const Matrix prec = invert(cov);
    return -0.5 * r.dot(prec * r) - 0.5 * log_det(cov) -
           0.5 * m * std::log(2.0 * M_PI);
}

struct Conditioned {
    Vector mean;
    Matrix cov;
};

/// Brute-force Gaussian conditioning: build the joint covariance over
/// train + test and apply the partitioned-normal formulas with an explicit
/// inverse of the noisy train block.
inline Conditioned condition(const Matrix& k_train, const Matrix& k_cross,
                             const Matrix& k_test, double noise_sigma,
                             const Vector& y, const Vector& mean_train,
                             const Vector& mean_test) {
    Matrix noisy = k_train;
    noisy.diagonal().array() += noise_sigma * noise_sigma;
    const Matrix prec = invert(noisy);
    Conditioned out;
    out.mean = mean_test + k_cross.transpose() * prec * (y - mean_train);
    out.cov = k_test - k_cross.transpose() * prec * k_cross;
    return out;
}

/// Random SPD matrix: B^T B + ridge*I.
inline Matrix random_spd(Eigen::Index n, std::mt19937_64& rng, double ridge = 0.5) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix b(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) b(i, j) = gauss(rng);
    Matrix a = b.transpose() * b;
    a = 0.5 * (a + a.transpose().eval());
    a.diagonal().array() += ridge;
    return a;
}

inline Vector random_vector(Eigen::Index n, std::mt19937_64& rng, double sd = 1.0) {
    std::normal_distribution<double> gauss(0.0, sd);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
    return v;
}

/// Draw from N(0, cov) (test-side sampling only).
inline Vector sample_gaussian(const Matrix& cov, std::mt19937_64& rng) {
    Matrix work = cov;
    work.diagonal().array() += 1e-12;
    Eigen::LLT<Matrix> llt(work);
    return Matrix(llt.matrixL()) * random_vector(cov.rows(), rng);
}

}  // namespace oracles
