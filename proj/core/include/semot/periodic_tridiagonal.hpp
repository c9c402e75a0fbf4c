#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace semot {

/// Solves cyclic tridiagonal systems
///   lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]   (indices mod n)
/// with the Sherman-Morrison correction of the Thomas algorithm. Scratch
/// storage is kept between calls; not safe for concurrent use.
class PeriodicTridiagonalSolver {
public:
    explicit PeriodicTridiagonalSolver(std::size_t n = 0);

    std::size_t size() const { return n_; }

    /// Throws std::invalid_argument on size mismatch (n < 3) and
    /// std::runtime_error on a zero pivot.
    void solve(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
               std::span<const double> rhs, std::span<double> x);

private:
    void thomas(std::span<const double> lower, std::span<const double> upper, std::span<const double> rhs,
                std::span<double> out);

    std::size_t n_;
    std::vector<double> modified_diag_;
    std::vector<double> cprime_;
    std::vector<double> u_;
    std::vector<double> z_;
};

}  // namespace semot
