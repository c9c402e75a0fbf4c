#pragma once

#include <functional>
#include <optional>

#include "semot/grid.hpp"
#include "semot/linalg.hpp"

namespace semot {

struct JumpScheme;

/// Reference volatility Sigma_2 = lambda2 * sigma2bar together with the
/// ellipticity bounds b_lo <= lambda2 <= b_hi and sigma2bar <= M I.
struct ReferenceModel {
    int dim = 1;
    std::function<double(double, const Point&)> lambda2;
    std::function<Matrix(double, const Point&)> sigma2bar;
    double b_lo = 1.0;
    double b_hi = 1.0;
    double M = 1.0;
    /// lambda2 == 1 and sigma2bar == I; enables closed-form shortcuts.
    bool brownian = false;

    static ReferenceModel brownian_reference(int dim);

    /// Evaluates both coefficients and checks them against the stated bounds.
    /// Throws std::invalid_argument on a violation.
    void validate_at(double t, const Point& x) const;
};

/// Sigma_1 = lambda1 * sigma1bar with tr(sigma2bar^{-1} sigma1bar) = d.
/// `sigma1bar` is empty when lambda1 == 0 (the Sigma_1 = 0 branch).
struct TraceDecomposition {
    double lambda1 = 0.0;
    std::optional<Matrix> sigma1bar;
};

/// Below this the Sigma_1 = 0 branch of the running cost is taken.
inline constexpr double kZeroIntensityThreshold = 1e-14;
/// Relative eigenvalue cut-off for the +infinity (singular) branch.
inline constexpr double kSingularRatio = 1e-12;

TraceDecomposition trace_decompose(const Matrix& sigma1, const ReferenceModel& ref, double t,
                                   const Point& x);

/// Trace-normalized running cost; +infinity on the boundary of the PSD cone minus {0}.
double ell_tr(double t, const Point& x, const Matrix& sigma1, const ReferenceModel& ref);

/// Closed form for the Brownian reference in 1D: s log s - s + 1 (s >= 0).
double ell_tr_brownian_1d(double sigma);

/// Entropy rate between two Gaussian-mark Poissonizations with intensity
/// factors lambda1, lambda2 and mark covariances sigma1bar, sigma2bar.
double ell_rate(double lambda1, const Matrix& sigma1bar, double lambda2, const Matrix& sigma2bar);

/// ell_rate with both schemes evaluated at (t, x).
double ell_rate(double t, const Point& x, const JumpScheme& scheme1, const JumpScheme& scheme2);

/// Time quadrature for primal_cost.
///   trapezoid: nodes 0..nt, each slice paired with its own density.
///   step:      sum over steps k of dt * ell_tr(Sigma*[k]) p[k+1], the pairing
///              used by the forward sweep; under it the discrete cost equals
///              the dual value plus sum phi1 (mu1 - p1) dx^d exactly.
enum class TimeQuadrature { trapezoid, step };

/// Integral over [0,T] x T^d of ell_tr(Sigma*) p with the rectangle rule in
/// space. Throws std::domain_error if ell_tr is infinite at a used node.
double primal_cost(const SpaceTimeMatrixField& sigma_star, const SpaceTimeScalarField& p,
                   const ReferenceModel& ref, TimeQuadrature quadrature = TimeQuadrature::trapezoid);

/// sum phi(0,x) mu0 dx^d - sum phi1 mu1 dx^d.
double dual_value(const SpaceTimeScalarField& phi, const ScalarField& mu0, const ScalarField& phi1,
                  const ScalarField& mu1);

}  // namespace semot
