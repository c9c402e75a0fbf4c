#include "semot/periodic_tridiagonal.hpp"

#include <stdexcept>

namespace semot {

PeriodicTridiagonalSolver::PeriodicTridiagonalSolver(std::size_t n)
    : n_(n), modified_diag_(n), cprime_(n), u_(n), z_(n) {}

void PeriodicTridiagonalSolver::thomas(std::span<const double> lower, std::span<const double> upper,
                                       std::span<const double> rhs, std::span<double> out) {
    const std::size_t n = n_;
    double pivot = modified_diag_[0];
    if (pivot == 0.0) throw std::runtime_error("PeriodicTridiagonalSolver: zero pivot");
    cprime_[0] = upper[0] / pivot;
    out[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = modified_diag_[i] - lower[i] * cprime_[i - 1];
        if (pivot == 0.0) throw std::runtime_error("PeriodicTridiagonalSolver: zero pivot");
        cprime_[i] = (i + 1 < n) ? upper[i] / pivot : 0.0;
        out[i] = (rhs[i] - lower[i] * out[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) out[i] -= cprime_[i] * out[i + 1];
}

void PeriodicTridiagonalSolver::solve(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs,
                                      std::span<double> x) {
    if (n_ < 3) throw std::invalid_argument("PeriodicTridiagonalSolver: need at least 3 unknowns");
    if (lower.size() != n_ || diag.size() != n_ || upper.size() != n_ || rhs.size() != n_ || x.size() != n_) {
        throw std::invalid_argument("PeriodicTridiagonalSolver: size mismatch");
    }
    const std::size_t n = n_;
    // Corner couplings: row 0 reaches x[n-1] through lower[0], row n-1 reaches x[0] through upper[n-1].
    const double beta = lower[0];
    const double alpha = upper[n - 1];
    const double gamma = -diag[0];
    if (gamma == 0.0) throw std::runtime_error("PeriodicTridiagonalSolver: zero diagonal");

    for (std::size_t i = 0; i < n; ++i) modified_diag_[i] = diag[i];
    modified_diag_[0] = diag[0] - gamma;
    modified_diag_[n - 1] = diag[n - 1] - alpha * beta / gamma;

    thomas(lower, upper, rhs, x);

    for (std::size_t i = 0; i < n; ++i) u_[i] = 0.0;
    u_[0] = gamma;
    u_[n - 1] = alpha;
    thomas(lower, upper, u_, z_);

    const double denom = 1.0 + z_[0] + beta * z_[n - 1] / gamma;
    if (denom == 0.0) throw std::runtime_error("PeriodicTridiagonalSolver: singular system");
    const double fact = (x[0] + beta * x[n - 1] / gamma) / denom;
    for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z_[i];
}

}  // namespace semot
