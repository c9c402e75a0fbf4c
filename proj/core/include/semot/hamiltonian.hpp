#pragma once

#include "semot/linalg.hpp"

namespace semot {

/// H(Gamma) = inf over PSD Sigma of 1/2 tr(Sigma Gamma) + ell_tr(Sigma) for the
/// Brownian reference, with its minimizer.
///
/// The infimum is attained at Sigma* = (1 - H) (Gamma + mu I)^{-1} where mu is
/// the unique scalar with Gamma + mu I > 0 and tr((Gamma + mu I)^{-1}) = d, and
/// H = 1 - exp(-1/2 [d (1 - mu) + log det(Gamma + mu I)]).
struct HamiltonianResult {
    double h_value = 0.0;
    double mu = 0.0;
    Matrix sigma_star;
    /// tr(Sigma*)/d; equals 1 - H under the Brownian reference.
    double lambda1_star = 1.0;
};

/// Lagrange multiplier of the trace constraint. The root lies in
/// (1 - lambda_max(Gamma), 1 - lambda_min(Gamma)].
double solve_mu(const Matrix& gamma);

/// Closed form in 1D and 2D, eigen-decomposition plus safeguarded Newton above.
HamiltonianResult hamiltonian(const Matrix& gamma);

/// 1D specialization: H = 1 - exp(-gamma/2), sigma* = exp(-gamma/2).
struct ScalarHamiltonian {
    double h_value;
    double sigma_star;
};
ScalarHamiltonian hamiltonian_1d(double gamma);

/// 2x2 specialization on the entries of a symmetric Gamma.
struct Hamiltonian2x2 {
    double h_value;
    double mu;
    double sxx;
    double sxy;
    double syy;
    /// q = -2 log(1 - H) = d (1 - mu) + log det(Gamma + mu I).
    double q;
    /// (Gamma + mu I)^{-1}, the gradient of q; Sigma* = exp(-q/2) times this.
    double bxx;
    double bxy;
    double byy;
};
Hamiltonian2x2 hamiltonian_2x2(double gxx, double gxy, double gyy);

namespace detail {

/// Dimension-generic route (eigen-decomposition + Newton-bisection on the
/// shifted multiplier), used for d >= 3 and as a cross-check of the closed forms.
HamiltonianResult hamiltonian_general(const Matrix& gamma);

/// Solves sum_i 1/(gaps_i + s) = d for s > 0, where gaps_i = lambda_i - lambda_min >= 0.
double solve_shifted_multiplier(const Eigen::VectorXd& gaps);

}  // namespace detail

}  // namespace semot
