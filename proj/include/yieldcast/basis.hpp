#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "yieldcast/data.hpp"
#include "yieldcast/numerics.hpp"

namespace yieldcast {

/// Fourier system {1, sin(w t), cos(w t), sin(2w t), cos(2w t), ...},
/// w = 2*pi/period.
struct FourierBasis {
    double period;
    int n_pairs;
};

/// Nelson-Siegel system {1, f1, f2} with f1 = (1 - e^{-L t})/(L t) and
/// f2 = f1 - e^{-L t}; decay rate L is per month.
struct NelsonSiegelBasis {
    double lambda;
};

/// {1, e^{r1 t}, e^{r2 t}, ...}
struct ExponentialBasis {
    std::vector<double> rates;
};

/// {1, e^{-L (t - c1)^2}, e^{-L (t - c2)^2}, ...}
struct GaussianRbfBasis {
    std::vector<double> centers;
    double lambda;
};

using BasisSpec =
    std::variant<FourierBasis, NelsonSiegelBasis, ExponentialBasis, GaussianRbfBasis>;

/// Number of basis functions (always includes the leading constant).
int basis_size(const BasisSpec& spec);

std::string basis_name(const BasisSpec& spec);

/// Throws on invalid parameters (period/lambda/width <= 0, n_pairs < 1).
void validate(const BasisSpec& spec);

/// One row per tau, one column per basis function. tau is in months
/// throughout; the tau -> 0 Nelson-Siegel limit (1, 1, 0) is handled
/// analytically.
Matrix design_matrix(const BasisSpec& spec, std::span<const double> taus);
Matrix design_matrix(const BasisSpec& spec, const TermGrid& grid);

/// Closed-form second derivatives of every basis function, evaluated at the
/// given points. Used by the roughness penalty; nothing is differentiated
/// numerically.
Matrix second_derivative_matrix(const BasisSpec& spec, std::span<const double> taus);

/// Roughness penalty: entries are the integrals of products of basis second
/// derivatives over [lo, hi], via composite Simpson quadrature.
SymMatrix penalty_matrix_r2(const BasisSpec& spec, double lo, double hi,
                            int n_panels = 200);

struct BasisFit {
    BasisSpec spec;
    Vector coefficients;
    double penalty_lambda = 0.0;
};

BasisFit fit_ols(const BasisSpec& spec, std::span<const double> taus, const Vector& y);
BasisFit fit_ols(const BasisSpec& spec, const TermGrid& grid, const YieldCurve& curve);

/// Roughness-penalized fit: coefficients solve
/// (X^T X + lambda R2) b = X^T y over [min(tau), max(tau)].
BasisFit fit_penalized(const BasisSpec& spec, std::span<const double> taus,
                       const Vector& y, double lambda);
BasisFit fit_penalized(const BasisSpec& spec, const TermGrid& grid,
                       const YieldCurve& curve, double lambda);

Vector evaluate(const BasisFit& fit, std::span<const double> taus);

/// b^T R2 b for a fit, the integrated squared curvature.
double curvature_energy(const BasisFit& fit, double lo, double hi);

}  // namespace yieldcast
